"""Quantified Boolean formulas: structural parameters, kernels, reductions and solvers."""

import json

from qbfstruct import _native
from qbfstruct._native import Formula, PreconditionError, fold

__all__ = ["Formula", "PreconditionError", "fold", "solve", "kernelize", "saw_fvs", "generate", "verify"]


def solve(formula, strategy="auto", deletion_set=None, c=None):
    """Decide ``formula``; returns a dict with ``value``, ``strategy`` and ``indices``."""
    if deletion_set is not None:
        deletion_set = set(deletion_set)
    value, used, indices = _native.solve(formula, strategy, deletion_set, c)
    return {"value": value, "strategy": used, "indices": indices}


def kernelize(formula, graph="primal"):
    """Returns ``(kernel, verdict, detail)``; ``detail`` holds ``stats`` and ``trace``."""
    kernel, verdict, detail = _native.kernelize(formula, graph)
    return kernel, verdict, json.loads(detail)


def saw_fvs(formula, source, dedicated=False, normalize=False):
    """Returns ``(formula, new_set, plan)``."""
    out, s_prime, plan = _native.saw_fvs(formula, set(source), dedicated, normalize)
    return out, s_prime, json.loads(plan)


def generate(planted, vars, seed, **kwargs):
    """Returns ``(formula, witness)`` for a planted structure such as ``"sparse-fvs"``."""
    formula, witness = _native.generate(planted, vars, seed, **kwargs)
    return formula, json.loads(witness)


def verify(transform, seed=0, count=50, budget=None):
    """Oracle check on generated instances; ``failure`` is ``None`` when all agree."""
    passed, skipped, failure = _native.verify(transform, seed, count, budget)
    return {"passed": passed, "skipped": skipped, "failure": json.loads(failure) if failure else None}

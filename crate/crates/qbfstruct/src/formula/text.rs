//! QDIMACS and the `qcdnf` extension.
//!
//! `qcdnf` header: `p qcdnf <nv> <nc> <nt> [cnf|dnf|and|or]`. Without the
//! optional kind token the matrix kind is inferred: no terms means CNF, no
//! clauses means DNF, otherwise a CDNF oriented by the innermost quantifier.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Lit, Matrix, Orientation, Qbf, Quant, Var};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Qdimacs,
    Qcdnf,
}

impl Format {
    /// Guess the format from the problem line.
    pub fn detect(text: &str) -> Format {
        let header = text.lines().map(str::trim).find(|l| l.starts_with('p'));
        match header {
            Some(h) if h.split_whitespace().nth(1) == Some("qcdnf") => Format::Qcdnf,
            _ => Format::Qdimacs,
        }
    }
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "qdimacs" => Ok(Format::Qdimacs),
            "qcdnf" => Ok(Format::Qcdnf),
            _ => Err(format!("unknown format `{s}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Drop clauses/terms containing a complementary pair instead of rejecting them.
    pub simplify_tautologies: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Cnf,
    Dnf,
    And,
    Or,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| err(line, format!("missing {what} in header")))?
        .parse()
        .map_err(|_| err(line, format!("malformed {what} in header")))
}

/// Parse a formula. Prefix order and clause/term order are preserved.
pub fn parse(text: &str, format: Format, opts: ParseOptions) -> Result<Qbf> {
    let mut header: Option<(usize, usize, usize, Option<Kind>)> = None;
    let mut prefix: Vec<(Quant, Var)> = Vec::new();
    let mut quantified = BTreeSet::new();
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut terms: Vec<Vec<Lit>> = Vec::new();
    let mut pending: Vec<Lit> = Vec::new();
    let mut pending_line = 0usize;
    let mut header_line = 0usize;

    let finish = |set: Vec<Lit>, line: usize, out: &mut Vec<Vec<Lit>>| -> Result<()> {
        let mut dedup: Vec<Lit> = Vec::with_capacity(set.len());
        for l in set {
            if !dedup.contains(&l) {
                dedup.push(l);
            }
        }
        if super::has_complementary(&dedup) {
            if opts.simplify_tautologies {
                return Ok(());
            }
            return Err(err(line, "complementary literals in one clause or term"));
        }
        out.push(dedup);
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let first = toks.next().unwrap_or_default();
        if first == "p" {
            if header.is_some() {
                return Err(err(line, "duplicate problem line"));
            }
            let kind_tok = toks.next();
            let (nv, nc) = (
                parse_count(toks.next(), line, "variable count")?,
                parse_count(toks.next(), line, "clause count")?,
            );
            let (nt, kind) = match (format, kind_tok) {
                (Format::Qdimacs, Some("cnf")) => (0, Some(Kind::Cnf)),
                (Format::Qcdnf, Some("qcdnf")) => {
                    let nt = parse_count(toks.next(), line, "term count")?;
                    let kind = match toks.next() {
                        None => None,
                        Some("cnf") => Some(Kind::Cnf),
                        Some("dnf") => Some(Kind::Dnf),
                        Some("and") => Some(Kind::And),
                        Some("or") => Some(Kind::Or),
                        Some(other) => {
                            return Err(err(line, format!("unknown matrix kind `{other}`")))
                        }
                    };
                    (nt, kind)
                }
                _ => return Err(err(line, "malformed problem line")),
            };
            if toks.next().is_some() {
                return Err(err(line, "trailing tokens in problem line"));
            }
            header = Some((nv, nc, nt, kind));
            header_line = line;
            continue;
        }
        let Some((nv, ..)) = header else {
            return Err(err(line, "content before problem line"));
        };
        let lits = |toks: std::str::SplitWhitespace, into: &mut Vec<Lit>| -> Result<bool> {
            for t in toks {
                let code: i64 = t
                    .parse()
                    .map_err(|_| err(line, format!("bad literal `{t}`")))?;
                if code == 0 {
                    return Ok(true);
                }
                if code.unsigned_abs() as usize > nv {
                    return Err(err(line, format!("variable {} out of range", code.abs())));
                }
                into.push(Lit::from_dimacs(code as i32).expect("non-zero"));
            }
            Ok(false)
        };
        match first {
            "e" | "a" => {
                if !clauses.is_empty() || !terms.is_empty() || !pending.is_empty() {
                    return Err(err(line, "quantifier line after matrix lines"));
                }
                let q = if first == "e" {
                    Quant::Exists
                } else {
                    Quant::Forall
                };
                let mut vars = Vec::new();
                if !lits(toks, &mut vars)? {
                    return Err(err(line, "quantifier line not terminated by 0"));
                }
                for l in vars {
                    if !l.is_positive() {
                        return Err(err(line, "negative variable in quantifier line"));
                    }
                    if !quantified.insert(l.var()) {
                        return Err(err(line, format!("variable {} quantified twice", l.var())));
                    }
                    prefix.push((q, l.var()));
                }
            }
            "t" => {
                if format != Format::Qcdnf {
                    return Err(err(line, "term line in plain QDIMACS"));
                }
                if !pending.is_empty() {
                    return Err(err(pending_line, "unterminated clause"));
                }
                let mut term = Vec::new();
                if !lits(toks, &mut term)? {
                    return Err(err(line, "term not terminated by 0"));
                }
                finish(term, line, &mut terms)?;
            }
            _ => {
                if !terms.is_empty() {
                    return Err(err(line, "clause line after term lines"));
                }
                if pending.is_empty() {
                    pending_line = line;
                }
                let whole = trimmed.split_whitespace();
                if lits(whole, &mut pending)? {
                    finish(std::mem::take(&mut pending), pending_line, &mut clauses)?;
                }
            }
        }
    }
    if !pending.is_empty() {
        return Err(err(pending_line, "unterminated clause"));
    }
    let Some((nv, nc, nt, kind)) = header else {
        return Err(err(1, "missing problem line"));
    };
    if !opts.simplify_tautologies {
        if clauses.len() != nc {
            return Err(err(
                header_line,
                format!("expected {nc} clauses, found {}", clauses.len()),
            ));
        }
        if terms.len() != nt {
            return Err(err(
                header_line,
                format!("expected {nt} terms, found {}", terms.len()),
            ));
        }
    }

    // Free variables are existential and outermost.
    let free: Vec<Var> = clauses
        .iter()
        .chain(&terms)
        .flatten()
        .map(|l| l.var())
        .filter(|v| !quantified.contains(v))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut full_prefix: Vec<(Quant, Var)> = free.into_iter().map(|v| (Quant::Exists, v)).collect();
    full_prefix.extend(prefix);

    let innermost = full_prefix.last().map(|p| p.0);
    let kind = match kind {
        Some(k) => k,
        None if terms.is_empty() && nt == 0 => Kind::Cnf,
        None if clauses.is_empty() && nc == 0 => Kind::Dnf,
        None => match innermost {
            Some(Quant::Exists) => Kind::And,
            Some(Quant::Forall) => Kind::Or,
            None => {
                return Err(err(
                    header_line,
                    "cannot infer CDNF orientation without a prefix",
                ))
            }
        },
    };
    let matrix = match kind {
        Kind::Cnf if terms.is_empty() => Matrix::Cnf(clauses),
        Kind::Dnf if clauses.is_empty() => Matrix::Dnf(terms),
        Kind::Cnf | Kind::Dnf => return Err(err(header_line, "matrix kind contradicts content")),
        Kind::And | Kind::Or => {
            let orientation = if kind == Kind::And {
                Orientation::CnfAndDnf
            } else {
                Orientation::DnfOrCnf
            };
            if let Some(q) = innermost {
                if Orientation::for_innermost(q) != orientation {
                    return Err(err(
                        header_line,
                        "CDNF orientation does not match the innermost quantifier",
                    ));
                }
            }
            Matrix::Cdnf {
                cnf: clauses,
                dnf: terms,
                orientation,
            }
        }
    };
    Qbf::new(nv as u32, full_prefix, matrix).map_err(|e| err(header_line, e.to_string()))
}

fn write_sets(out: &mut String, sets: &[Vec<Lit>], lead: &str) {
    for s in sets {
        out.push_str(lead);
        for l in s {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
}

/// Serialize a formula. Plain QDIMACS accepts only CNF matrices.
pub fn serialize(q: &Qbf, format: Format) -> Result<String> {
    let mut out = String::new();
    let clauses = q.matrix.clauses();
    let terms = q.matrix.terms();
    match format {
        Format::Qdimacs => {
            if !q.matrix.is_cnf() {
                return Err(Error::Serialize("QDIMACS holds only CNF matrices".into()));
            }
            let _ = writeln!(out, "p cnf {} {}", q.num_vars, clauses.len());
        }
        Format::Qcdnf => {
            let inferred = if terms.is_empty() {
                Some(Kind::Cnf)
            } else if clauses.is_empty() {
                Some(Kind::Dnf)
            } else {
                q.innermost().map(|k| match k {
                    Quant::Exists => Kind::And,
                    Quant::Forall => Kind::Or,
                })
            };
            let actual = match &q.matrix {
                Matrix::Cnf(_) => Kind::Cnf,
                Matrix::Dnf(_) => Kind::Dnf,
                Matrix::Cdnf {
                    orientation: Orientation::CnfAndDnf,
                    ..
                } => Kind::And,
                Matrix::Cdnf {
                    orientation: Orientation::DnfOrCnf,
                    ..
                } => Kind::Or,
            };
            let _ = write!(
                out,
                "p qcdnf {} {} {}",
                q.num_vars,
                clauses.len(),
                terms.len()
            );
            if inferred != Some(actual) {
                out.push_str(match actual {
                    Kind::Cnf => " cnf",
                    Kind::Dnf => " dnf",
                    Kind::And => " and",
                    Kind::Or => " or",
                });
            }
            out.push('\n');
        }
    }
    for (quant, vars) in q.blocks() {
        out.push(quant.letter());
        for v in vars {
            let _ = write!(out, " {v}");
        }
        out.push_str(" 0\n");
    }
    write_sets(&mut out, clauses, "");
    write_sets(&mut out, terms, "t ");
    Ok(out)
}

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Structural analysis, kernelization, reductions and solving for quantified Boolean formulas.
#[derive(Parser, Debug)]
#[command(name = "qbfstruct", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Input format; detected from the problem line when omitted.
    #[arg(long, global = true, value_enum)]
    pub format: Option<InputFormat>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for generation and verification.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for batch verification; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Most variables the brute-force oracle may branch on.
    #[arg(long, global = true, env = "QBFSTRUCT_VAR_BUDGET")]
    pub var_budget: Option<usize>,
    /// Reject clauses holding a complementary pair instead of dropping them.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InputFormat {
    Qdimacs,
    Qcdnf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GraphArg {
    Primal,
    Incidence,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sizes, quantifier depth and graph sizes.
    Stats { input: PathBuf },
    /// Structural parameters by exhaustive search up to a size limit.
    Params {
        input: PathBuf,
        /// Largest deletion set to search for.
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// Component bound for the c-deletion number.
        #[arg(long)]
        c: Option<usize>,
    },
    /// Decide the formula and print TRUE or FALSE.
    Solve {
        input: PathBuf,
        #[arg(long, default_value = "auto")]
        strategy: String,
        /// Comma-separated deletion set, e.g. 1,4,7.
        #[arg(long, value_delimiter = ',')]
        deletion_set: Option<Vec<u32>>,
        /// Component bound the deletion set must respect.
        #[arg(long)]
        c: Option<usize>,
    },
    /// Apply the reduction rules and write the kernel plus a JSON trace.
    Kernelize {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "primal")]
        graph: GraphArg,
        /// Kernel file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Trace file; defaults to the output path with `.trace.json` appended.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Structure-aware reductions.
    #[command(subcommand)]
    Saw(SawCommand),
    /// Check a transformation against the oracle on generated instances.
    Verify {
        /// Transformation name, or `all`.
        transform: String,
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Generate an instance with planted structure.
    Gen(GenArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SawOutput {
    input: PathBuf,
    /// Output formula; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Plan sidecar; defaults to the output path with `.plan.json` appended.
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum SawCommand {
    /// Replace a sparse feedback vertex set by index variables.
    Fvs {
        #[command(flatten)]
        io: SawOutput,
        /// The sparse FVS; the smallest one up to `--k` variables when omitted.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<u32>>,
        #[arg(long, default_value_t = 8)]
        k: usize,
        /// One index per source variable instead of three shared ones.
        #[arg(long)]
        dedicated: bool,
        /// Split wide terms so the DNF part has width at most 3.
        #[arg(long)]
        normalize: bool,
    },
    /// The treedepth variant, driven by an α-treedepth decomposition in JSON.
    Td {
        #[command(flatten)]
        io: SawOutput,
        #[arg(long)]
        decomposition: PathBuf,
        #[arg(long)]
        normalize: bool,
    },
    /// Encode a formula with a DNF part as a CNF along a tree decomposition.
    TdCnf {
        #[command(flatten)]
        io: SawOutput,
    },
    /// Merge a singleton side into one clause or term.
    Fold {
        #[command(flatten)]
        io: SawOutput,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PlantedArg {
    SparseFvs,
    Fes,
    CDeletion,
    SingleDel,
    E1a,
    UniComplete,
    AlphaTd,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub planted: PlantedArg,
    #[arg(long, default_value_t = 10)]
    pub vars: usize,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 3)]
    pub width: usize,
    #[arg(long)]
    pub clauses: Option<usize>,
    /// Size of the planted set (feedback edges for `fes`, main path for `alpha-td`).
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Component bound for deletion-set shapes.
    #[arg(long, default_value_t = 2)]
    pub c: usize,
    /// Output formula; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Witness sidecar; defaults to the output path with `.witness.json` appended.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

/// Exit status for a precondition that does not hold.
const EXIT_PRECONDITION: u8 = 10;
/// Exit status for I/O, parse and usage errors.
const EXIT_INPUT: u8 = 1;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match commands::run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let precondition = e
                .downcast_ref::<qbfstruct::Error>()
                .is_some_and(qbfstruct::Error::is_precondition);
            ExitCode::from(if precondition {
                EXIT_PRECONDITION
            } else {
                EXIT_INPUT
            })
        }
    }
}

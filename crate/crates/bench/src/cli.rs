use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use saddle_core::analysis::BetaRule;
use saddle_core::precond::{InnerSolvePolicy, PreconditionerKind};

use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemKind {
    Example1,
    Example2,
    Kkt,
}

impl ProblemKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::Kkt => "kkt",
        }
    }

    /// Default `α`: 5e-2 for the first family, 5e-1 otherwise.
    pub fn default_alpha(self) -> f64 {
        match self {
            Self::Example1 => 5e-2,
            Self::Example2 | Self::Kkt => 5e-1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Md,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InnerMode {
    Exact,
    Cg,
}

/// Right-hand side for KKT runs.
#[derive(Debug, Clone, PartialEq)]
pub enum KktRhs {
    /// `b = ℬ·1`, so `Err` is reported.
    AllOnes,
    /// A Matrix Market vector stated for the symmetric form; `Err` is `-`.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktFiles {
    pub a: PathBuf,
    pub b: PathBuf,
    pub c: PathBuf,
    pub rhs: KktRhs,
}

/// Candidate `α` values checked against target `β` values, one per size.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaTableRequest {
    pub alphas: Vec<f64>,
    pub targets: Vec<f64>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub problem: ProblemKind,
    pub sizes: Vec<usize>,
    pub kkt: Option<KktFiles>,
    pub preconditioners: Vec<PreconditionerKind>,
    pub alpha: f64,
    pub beta_rule: BetaRule,
    pub tol: f64,
    pub maxit: usize,
    pub time_limit_s: f64,
    pub inner_policy: InnerSolvePolicy,
    pub output_format: OutputFormat,
    pub out: Option<PathBuf>,
    pub save_solutions: Option<PathBuf>,
    pub verbose: bool,
    pub beta_table: Option<BetaTableRequest>,
}

impl BenchmarkConfig {
    /// Defaults for `problem` with the given sizes and preconditioners.
    pub fn new(problem: ProblemKind, sizes: Vec<usize>, preconditioners: Vec<PreconditionerKind>) -> Self {
        Self {
            problem,
            sizes,
            kkt: None,
            preconditioners,
            alpha: problem.default_alpha(),
            beta_rule: BetaRule::Averaged,
            tol: 1e-6,
            maxit: 1000,
            time_limit_s: 1000.0,
            inner_policy: InnerSolvePolicy::cg(),
            output_format: OutputFormat::Csv,
            out: None,
            save_solutions: None,
            verbose: false,
            beta_table: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "saddle-bench",
    version,
    about = "FGMRES benchmarks for three-by-three block saddle point preconditioners"
)]
struct Cli {
    /// Problem family.
    #[arg(long, value_enum)]
    problem: ProblemKind,

    /// Grid parameters p (comma-separated) for the synthetic families.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,

    /// Preconditioners: I, P, PD1, PD2, P1, P2, P3 (repeatable, comma-separated).
    #[arg(long = "precond", value_delimiter = ',')]
    preconds: Vec<String>,

    /// Shift α of the block triangular preconditioner [default: 0.05 for example1, 0.5 otherwise].
    #[arg(long)]
    alpha: Option<f64>,

    /// β rule: ave, c, b or manual:<value>.
    #[arg(long, default_value = "ave")]
    beta_rule: String,

    #[arg(long, default_value_t = 1e-6)]
    tol: f64,

    #[arg(long, default_value_t = 1000)]
    maxit: usize,

    /// Wall-clock limit per solve, in seconds.
    #[arg(long, default_value_t = 1000.0)]
    time_limit: f64,

    /// Inner block solves.
    #[arg(long, value_enum, default_value = "cg")]
    inner: InnerMode,

    #[arg(long, value_enum, default_value = "csv")]
    format: OutputFormat,

    /// Matrix Market file with the SPD block A (n×n)
    #[arg(long)]
    kkt_a: Option<PathBuf>,
    /// Matrix Market file with B (m×n)
    #[arg(long)]
    kkt_b: Option<PathBuf>,
    /// Matrix Market file with C (l×m)
    #[arg(long)]
    kkt_c: Option<PathBuf>,

    /// KKT right-hand side: "ones" or a Matrix Market vector file.
    #[arg(long, default_value = "ones")]
    kkt_rhs: String,

    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Directory receiving each computed solution as a Matrix Market vector.
    #[arg(long)]
    save_solutions: Option<PathBuf>,

    /// Adds setup time, α and β columns.
    #[arg(long)]
    verbose: bool,

    /// Report β per size instead of solving.
    #[arg(long)]
    beta_table: bool,

    /// α values compared in the β table (defaults to --alpha).
    #[arg(long, value_delimiter = ',')]
    alpha_candidates: Vec<f64>,

    /// Expected β per size, matched in the β table.
    #[arg(long, value_delimiter = ',')]
    beta_targets: Vec<f64>,

    /// Absolute tolerance for --beta-targets.
    #[arg(long, default_value_t = 5e-3)]
    beta_tolerance: f64,
}

fn usage(msg: impl Into<String>) -> BenchError {
    BenchError::Usage(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, BenchError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(usage(format!("--{name} must be positive, got {v}")))
    }
}

/// Parses command-line arguments (the first item is the program name).
/// `--help` and `--version` surface as [`BenchError::Help`].
pub fn parse_cli<I, T>(args: I) -> Result<BenchmarkConfig, BenchError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => BenchError::Help(e.to_string()),
        _ => BenchError::Usage(e.render().to_string()),
    })?;

    let mut preconditioners = Vec::new();
    for p in &cli.preconds {
        let k: PreconditionerKind = p.parse().map_err(|e: saddle_core::Error| usage(e.to_string()))?;
        if !preconditioners.contains(&k) {
            preconditioners.push(k);
        }
    }
    if preconditioners.is_empty() && !cli.beta_table {
        return Err(usage("at least one --precond is required"));
    }

    let kkt = match cli.problem {
        ProblemKind::Kkt => {
            let (Some(a), Some(b), Some(c)) = (cli.kkt_a, cli.kkt_b, cli.kkt_c) else {
                return Err(usage("--problem kkt needs --kkt-a, --kkt-b and --kkt-c"));
            };
            let rhs = match cli.kkt_rhs.as_str() {
                "ones" => KktRhs::AllOnes,
                path => KktRhs::File(PathBuf::from(path)),
            };
            if cli.beta_table {
                return Err(usage("--beta-table applies to the synthetic families only"));
            }
            Some(KktFiles { a, b, c, rhs })
        }
        _ => {
            if cli.kkt_a.is_some() || cli.kkt_b.is_some() || cli.kkt_c.is_some() {
                return Err(usage("--kkt-a/--kkt-b/--kkt-c require --problem kkt"));
            }
            if cli.sizes.is_empty() {
                return Err(usage("--sizes is required for the synthetic families"));
            }
            if let Some(&p) = cli.sizes.iter().find(|&&p| p < 2) {
                return Err(usage(format!("--sizes entries must be at least 2, got {p}")));
            }
            None
        }
    };

    let beta_rule: BetaRule = cli.beta_rule.parse().map_err(|e: saddle_core::Error| usage(e.to_string()))?;
    let alpha = positive("alpha", cli.alpha.unwrap_or(cli.problem.default_alpha()))?;
    let tol = positive("tol", cli.tol)?;
    if cli.maxit == 0 {
        return Err(usage("--maxit must be positive"));
    }
    if cli.time_limit.is_nan() {
        return Err(usage("--time-limit is not a number"));
    }

    let beta_table = if cli.beta_table {
        let alphas = if cli.alpha_candidates.is_empty() {
            vec![alpha]
        } else {
            cli.alpha_candidates
                .iter()
                .map(|&a| positive("alpha-candidates", a))
                .collect::<Result<_, _>>()?
        };
        if !cli.beta_targets.is_empty() && cli.beta_targets.len() != cli.sizes.len() {
            return Err(usage(format!(
                "--beta-targets has {} entries for {} sizes",
                cli.beta_targets.len(),
                cli.sizes.len()
            )));
        }
        Some(BetaTableRequest {
            alphas,
            targets: cli.beta_targets,
            tolerance: positive("beta-tolerance", cli.beta_tolerance)?,
        })
    } else {
        if !cli.alpha_candidates.is_empty() || !cli.beta_targets.is_empty() {
            return Err(usage("--alpha-candidates and --beta-targets require --beta-table"));
        }
        None
    };

    Ok(BenchmarkConfig {
        problem: cli.problem,
        sizes: if kkt.is_some() { Vec::new() } else { cli.sizes },
        kkt,
        preconditioners,
        alpha,
        beta_rule,
        tol,
        maxit: cli.maxit,
        time_limit_s: cli.time_limit,
        inner_policy: match cli.inner {
            InnerMode::Exact => InnerSolvePolicy::exact(),
            InnerMode::Cg => InnerSolvePolicy::cg(),
        },
        output_format: cli.format,
        out: cli.out,
        save_solutions: cli.save_solutions,
        verbose: cli.verbose,
        beta_table,
    })
}

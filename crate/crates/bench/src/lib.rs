//! Benchmark harness: builds problem instances, runs FGMRES with each
//! requested preconditioner from a zero initial guess and renders
//! `IT / CPU / Res / Err` tables.

mod cli;
mod run;
mod table;

pub use cli::{parse_cli, BenchmarkConfig, BetaTableRequest, KktFiles, KktRhs, OutputFormat, ProblemKind};
pub use run::{beta_table, run_benchmark, BenchmarkRow, BetaEntry, BetaReport, RowFlag};
pub use table::{beta_verdict, emit_beta_table, emit_table, fmt_sci, legend, CSV_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// `--help` or `--version` output.
    #[error("{0}")]
    Help(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] saddle_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

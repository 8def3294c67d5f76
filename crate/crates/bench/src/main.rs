use std::io::Write;
use std::process::ExitCode;

use saddle_bench::{
    beta_table, beta_verdict, emit_beta_table, emit_table, legend, parse_cli, run_benchmark, BenchError,
    BenchmarkConfig, OutputFormat, RowFlag,
};

fn write_output(cfg: &BenchmarkConfig, text: &str) -> Result<(), BenchError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cfg: &BenchmarkConfig) -> Result<ExitCode, BenchError> {
    if cfg.beta_table.is_some() {
        let report = beta_table(cfg)?;
        let mut text = emit_beta_table(&report, cfg.output_format);
        let verdict = beta_verdict(&report);
        if cfg.beta_table.as_ref().is_some_and(|r| !r.targets.is_empty()) {
            match cfg.output_format {
                OutputFormat::Md => text.push_str(&format!("\n{verdict}\n")),
                OutputFormat::Csv => eprintln!("{verdict}"),
            }
        }
        write_output(cfg, &text)?;
        return Ok(ExitCode::SUCCESS);
    }

    let rows = run_benchmark(cfg);
    let mut text = emit_table(&rows, cfg.output_format, cfg.verbose);
    let legend = legend(cfg.tol, cfg.maxit, cfg.time_limit_s);
    match cfg.output_format {
        OutputFormat::Md => {
            text.push('\n');
            text.push_str(&legend);
        }
        OutputFormat::Csv => {
            if cfg.verbose {
                eprint!("{legend}");
            }
        }
    }
    for r in &rows {
        if let Some(note) = &r.note {
            eprintln!("{} n={} {}: {}", r.problem, r.n, r.precond, note);
        }
    }
    write_output(cfg, &text)?;
    if rows.iter().any(|r| r.flag == RowFlag::Failed) {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn main() -> ExitCode {
    let cfg = match parse_cli(std::env::args_os()) {
        Ok(c) => c,
        Err(BenchError::Help(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(code) => code,
        Err(BenchError::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

use crate::cli::OutputFormat;
use crate::run::{BenchmarkRow, BetaReport, RowFlag};

pub const CSV_HEADER: &str = "problem,n,m,l,precond,IT,CPU,Res,Err,flag";

/// Two significant digits with a two-digit exponent, e.g. `8.7e-07`.
pub fn fmt_sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.1e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

/// Fixed notation in `[1e-3, 1e4)`, scientific otherwise.
fn fmt_general(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.4}")
    } else {
        format!("{v:.3e}")
    }
}

fn fmt_cpu(v: f64) -> String {
    format!("{v:.2}")
}

/// Cells `[IT, CPU, Res, Err]` for a row.
fn solve_cells(r: &BenchmarkRow) -> [String; 4] {
    let dash = || "-".to_string();
    match r.flag {
        RowFlag::Rejected => ["§".into(), dash(), dash(), dash()],
        RowFlag::Skipped | RowFlag::Failed => [dash(), dash(), dash(), dash()],
        flag => {
            let mark = flag.symbol();
            let it = r.iterations.map_or_else(dash, |v| format!("{v}{mark}"));
            let cpu = r.cpu_seconds.map_or_else(dash, fmt_cpu);
            let res = r.res.map_or_else(dash, |v| format!("{}{mark}", fmt_sci(v)));
            let err = r.err.map_or_else(dash, |v| format!("{}{mark}", fmt_sci(v)));
            [it, cpu, res, err]
        }
    }
}

fn cells(r: &BenchmarkRow, verbose: bool) -> Vec<String> {
    let [it, cpu, res, err] = solve_cells(r);
    let mut out = vec![
        r.problem.clone(),
        r.n.to_string(),
        r.m.to_string(),
        r.l.to_string(),
        r.precond.label().to_string(),
        it,
        cpu,
        res,
        err,
        r.flag.symbol().to_string(),
    ];
    if verbose {
        let opt = |v: Option<f64>, f: fn(f64) -> String| v.map_or_else(|| "-".to_string(), f);
        out.push(opt(r.setup_seconds, fmt_cpu));
        out.push(opt(r.alpha, fmt_sci));
        out.push(opt(r.beta, fmt_general));
    }
    out
}

fn header(verbose: bool) -> Vec<String> {
    let mut h: Vec<String> = CSV_HEADER.split(',').map(str::to_string).collect();
    if verbose {
        h.extend(["setup", "alpha", "beta"].map(str::to_string));
    }
    h
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(head: Vec<String>, body: Vec<Vec<String>>, format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            for line in std::iter::once(&head).chain(&body) {
                let fields: Vec<String> = line.iter().map(|c| csv_field(c)).collect();
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
        OutputFormat::Md => {
            let mut width: Vec<usize> = head.iter().map(|c| c.chars().count().max(3)).collect();
            for line in &body {
                for (w, c) in width.iter_mut().zip(line) {
                    *w = (*w).max(c.chars().count());
                }
            }
            let fmt_line = |line: &[String]| {
                let padded: Vec<String> = line
                    .iter()
                    .zip(&width)
                    .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                    .collect();
                format!("| {} |\n", padded.join(" | "))
            };
            out.push_str(&fmt_line(&head));
            let rule: Vec<String> = width.iter().map(|&w| "-".repeat(w)).collect();
            out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
            for line in &body {
                out.push_str(&fmt_line(line));
            }
        }
    }
    out
}

/// Renders benchmark rows. CSV output is the header plus one line per
/// row; Markdown output is an aligned pipe table.
pub fn emit_table(rows: &[BenchmarkRow], format: OutputFormat, verbose: bool) -> String {
    let body = rows.iter().map(|r| cells(r, verbose)).collect();
    render(header(verbose), body, format)
}

/// Meaning of the flag symbols and of the `Res`/`Err` columns.
pub fn legend(tol: f64, maxit: usize, time_limit_s: f64) -> String {
    format!(
        "Res = ||b - A x||_2 / ||b||_2 on the true residual of the symmetric system, \
         FGMRES from x = 0, stopped once Res <= {tol:e}\n\
         Err = ||x - x*||_2 / ||x*||_2 with x* the all-ones exact solution (- when unknown)\n\
         † not converged within {time_limit_s} seconds\n\
         ‡ not converged within {maxit} iterations\n\
         § preconditioner not formed: A is not SPD or B, C are not of full row rank\n\
         * iteration broke down before convergence\n\
         - not run: a dense block would exceed its size cap\n\
         E row failed (see stderr)\n"
    )
}

/// Renders a β report, followed in Markdown by the candidates that matched
/// every target.
pub fn emit_beta_table(report: &BetaReport, format: OutputFormat) -> String {
    let head: Vec<String> = ["problem", "p", "alpha", "rule", "normB", "normC", "beta", "target", "match"]
        .map(str::to_string)
        .to_vec();
    let body = report
        .entries
        .iter()
        .map(|e| {
            vec![
                e.problem.clone(),
                e.p.to_string(),
                fmt_sci(e.alpha),
                report.rule.to_string(),
                format!("{:.6}", e.norm_b),
                format!("{:.6}", e.norm_c),
                fmt_general(e.beta),
                e.target.map_or_else(|| "-".into(), |t| format!("{t}")),
                e.matches.map_or_else(|| "-".into(), |m| if m { "yes" } else { "no" }.into()),
            ]
        })
        .collect();
    render(head, body, format)
}

/// One-line verdict on which candidate `α` reproduces the targets.
pub fn beta_verdict(report: &BetaReport) -> String {
    match report.matching_alphas.as_slice() {
        [] => "no candidate alpha reproduces every target beta".to_string(),
        [a] => format!("alpha = {} reproduces every target beta", fmt_sci(*a)),
        many => format!(
            "several candidate alphas reproduce every target beta: {}",
            many.iter().map(|a| fmt_sci(*a)).collect::<Vec<_>>().join(", ")
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use saddle_core::precond::PreconditionerKind;

    fn row(flag: RowFlag) -> BenchmarkRow {
        BenchmarkRow {
            problem: "example1".into(),
            n: 512,
            m: 256,
            l: 256,
            precond: PreconditionerKind::PTriangular,
            iterations: Some(33),
            cpu_seconds: Some(0.1234),
            setup_seconds: Some(0.01),
            res: Some(8.66e-7),
            err: Some(2.6e-6),
            alpha: Some(0.05),
            beta: Some(0.94),
            flag,
            note: None,
        }
    }

    #[test]
    fn scientific_format() {
        assert_eq!(fmt_sci(8.66e-7), "8.7e-07");
        assert_eq!(fmt_sci(1.0), "1.0e+00");
        assert_eq!(fmt_sci(2.5e12), "2.5e+12");
        assert_eq!(fmt_sci(0.0), "0.0e+00");
    }

    #[test]
    fn single_converged_row_csv() {
        let t = emit_table(&[row(RowFlag::Converged)], OutputFormat::Csv, false);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines, vec![CSV_HEADER, "example1,512,256,256,P,33,0.12,8.7e-07,2.6e-06,"]);
    }

    #[test]
    fn unconverged_rows_are_annotated() {
        let t = emit_table(&[row(RowFlag::TimeLimit)], OutputFormat::Csv, false);
        assert!(t.ends_with("example1,512,256,256,P,33†,0.12,8.7e-07†,2.6e-06†,†\n"));
        let t = emit_table(&[row(RowFlag::MaxIt)], OutputFormat::Csv, false);
        assert!(t.contains(",33‡,"));
    }

    #[test]
    fn missing_error_renders_dash() {
        let mut r = row(RowFlag::Converged);
        r.err = None;
        let t = emit_table(&[r], OutputFormat::Csv, false);
        assert!(t.lines().nth(1).unwrap().ends_with(",8.7e-07,-,"));
    }

    #[test]
    fn rejected_row() {
        let t = emit_table(&[row(RowFlag::Rejected)], OutputFormat::Csv, false);
        assert_eq!(t.lines().nth(1).unwrap(), "example1,512,256,256,P,§,-,-,-,§");
    }

    #[test]
    fn markdown_is_aligned() {
        let t = emit_table(&[row(RowFlag::Converged), row(RowFlag::Rejected)], OutputFormat::Md, true);
        let widths: Vec<usize> = t.lines().map(|l| l.chars().count()).collect();
        assert!(widths.windows(2).all(|w| w[0] == w[1]), "{t}");
        assert!(t.lines().next().unwrap().contains("| setup"));
    }

    #[test]
    fn csv_quotes_commas() {
        let mut r = row(RowFlag::Converged);
        r.problem = "kkt:a,b".into();
        assert!(emit_table(&[r], OutputFormat::Csv, false).contains("\"kkt:a,b\""));
    }
}

//! Command-line front end. Every command writes CSV with a `#` metadata
//! preamble and a one-line header.
//!
//! Exit codes: 0 clean, 1 I/O failure, 2 config error, 3 numerical
//! nonconvergence, 4 verification failure.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{ConfigError, RunConfig};
use crate::convolve::{radial_mass, solve_dirichlet, BoundarySpec, Piece};
use crate::error::Error;
use crate::kernels::{Kernel, KernelForm, Point};
use crate::verify::{identity_suite, oracle_vs_convolution, residual_order, Equation, FdBox};
use crate::worked_example::{
    example_g, example_g_quadrature, example_u, example_u_from_derivative, ExamplePoint,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "keldysh", version, about = "Dirichlet kernels for degenerate elliptic equations in a half-space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (default: the config's `output`, else standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads, 0 = one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Kernel values on the configured grid.
    Eval,
    /// Numeric kernel mass against its closed form.
    Mass,
    /// Dirichlet solve by convolution with the kernel.
    Solve,
    /// Identity suite, residual orders and (optionally) the FD oracle.
    Verify,
    /// The x₊^(-3/2) worked example.
    Example,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Mass => "mass",
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Example => "example",
        }
    }
}

/// CSV text and exit code of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

/// Shortest round-trip representation, scientific outside `[1e-4, 1e15)`.
fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

struct Table {
    preamble: Vec<String>,
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(command: Command, cfg: &RunConfig, kernel: Option<&Kernel>, header: &[String]) -> Table {
        let q = &cfg.quadrature;
        let mut preamble = vec![
            format!("# keldysh {}", env!("CARGO_PKG_VERSION")),
            format!("# command: {}", command.name()),
            format!("# params: {}", cfg.params.describe()),
        ];
        if let Some(k) = kernel {
            preamble.push(format!("# kernel: {}", k.form().name()));
        }
        preamble.push(format!(
            "# quadrature: rel_tol={} abs_tol={} max_subdivisions={} truncation_mass={}",
            num(q.rel_tol), num(q.abs_tol), q.max_subdivisions, num(q.truncation_mass)
        ));
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Table { preamble, writer }
    }

    fn note(&mut self, line: String) {
        self.preamble.push(format!("# {line}"));
    }

    fn row(&mut self, fields: Vec<String>) {
        self.writer.write_record(&fields).expect("writing to memory");
    }

    fn finish(self, exit_code: i32) -> Outcome {
        let body = String::from_utf8(self.writer.into_inner().expect("flush to memory"))
            .expect("csv output is utf-8");
        let mut text = self.preamble.join("\n");
        text.push('\n');
        text.push_str(&body);
        Outcome { text, exit_code }
    }
}

fn coord_header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = if n == 1 {
        vec!["x".into()]
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    };
    h.push("y".into());
    h
}

fn coords(p: &Point) -> Vec<String> {
    p.x.iter().chain(std::iter::once(&p.y)).map(|v| num(*v)).collect()
}

fn config_failure(e: ConfigError) -> Outcome {
    Outcome {
        text: format!("error: {e}\n"),
        exit_code: EXIT_CONFIG,
    }
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let kernel = cfg.build_kernel()?;
    let mut header = coord_header(cfg.n());
    header.extend(["value".into(), "error".into()]);
    let mut t = Table::new(Command::Eval, cfg, Some(&kernel), &header);
    let values: Vec<_> = cfg.points.par_iter().map(|p| kernel.eval(p)).collect();
    for (p, v) in cfg.points.iter().zip(values) {
        let mut row = coords(p);
        match v {
            Ok(v) => row.extend([num(v), String::new()]),
            Err(e) => row.extend([String::new(), e.to_string()]),
        }
        t.row(row);
    }
    Ok(t.finish(EXIT_OK))
}

pub fn cmd_mass(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let kernel = cfg.build_kernel()?;
    let header: Vec<String> = ["y", "numeric_mass", "closed_form_mass", "abs_diff", "error"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut t = Table::new(Command::Mass, cfg, Some(&kernel), &header);
    let has_closed_form = kernel.params().lambda > 0.0;
    if !has_closed_form {
        t.note("closed_form_mass is NA for lambda = 0; abs_diff is measured against 1".into());
    }
    let mut exit = EXIT_OK;
    let results: Vec<_> = cfg
        .mass_heights
        .par_iter()
        .map(|&y| {
            let m = radial_mass(&kernel, y, &cfg.quadrature)?;
            let c = kernel.closed_form_mass(y)?;
            Ok::<_, Error>((m, c))
        })
        .collect();
    for (&y, r) in cfg.mass_heights.iter().zip(results) {
        match r {
            Ok((m, c)) => t.row(vec![
                num(y),
                num(m),
                if has_closed_form { num(c) } else { "NA".into() },
                num((m - c).abs()),
                String::new(),
            ]),
            Err(e) => {
                if matches!(e, Error::NonConvergence { .. }) {
                    exit = EXIT_NONCONVERGENCE;
                }
                t.row(vec![num(y), String::new(), String::new(), String::new(), e.to_string()]);
            }
        }
    }
    Ok(t.finish(exit))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let kernel = cfg.build_kernel()?;
    let boundary = cfg.boundary.as_ref().ok_or_else(|| ConfigError {
        field: "boundary".into(),
        message: "solve needs boundary data".into(),
    })?;
    let mut header = coord_header(cfg.n());
    header.extend(["u", "est_error", "truncation_bound", "converged"].map(String::from));
    let mut t = Table::new(Command::Solve, cfg, Some(&kernel), &header);
    t.note(format!("boundary: {}", boundary.description));
    let field = match solve_dirichlet(&boundary.spec, &cfg.points, &kernel, &cfg.quadrature) {
        Ok(f) => f,
        Err(e) => {
            t.note(format!("error: {e}"));
            return Ok(t.finish(EXIT_NONCONVERGENCE));
        }
    };
    for ((p, v), d) in field.points.iter().zip(&field.values).zip(&field.diagnostics) {
        let mut row = coords(p);
        row.extend([
            num(*v),
            num(d.quad_err),
            d.truncation_bound.map_or_else(|| "NA".into(), num),
            d.converged.to_string(),
        ]);
        t.row(row);
    }
    let exit = if field.all_converged() {
        EXIT_OK
    } else {
        EXIT_NONCONVERGENCE
    };
    Ok(t.finish(exit))
}

struct CheckRows {
    rows: Vec<[String; 5]>,
    failed: bool,
}

impl CheckRows {
    fn push(&mut self, check: &str, case: String, measured: f64, threshold: String, pass: bool) {
        self.failed |= !pass;
        self.rows.push([
            check.into(),
            case,
            num(measured),
            threshold,
            if pass { "pass" } else { "fail" }.into(),
        ]);
    }

    fn error(&mut self, check: &str, case: String, e: Error) {
        self.failed = true;
        self.rows.push([check.into(), case, String::new(), e.to_string(), "error".into()]);
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let reference = cfg.build_kernel()?;
    let kernel = reference.with_constant_scale(cfg.verify.constant_scale);
    let v = &cfg.verify;
    let header = ["check", "case", "measured", "threshold", "status"].map(String::from);
    let mut t = Table::new(Command::Verify, cfg, Some(&kernel), &header);
    if v.constant_scale != 1.0 {
        t.note(format!("kernel constant scaled by {}", v.constant_scale));
    }
    let mut c = CheckRows {
        rows: Vec::new(),
        failed: false,
    };
    match identity_suite(&kernel, &v.y, v.delta, &cfg.quadrature) {
        Ok(rep) => {
            for r in &rep.rows {
                let case = format!("y={}", r.y);
                c.push("positivity", case.clone(), r.min_value, "> 0".into(), r.min_value > 0.0);
                match reference.closed_form_mass(r.y) {
                    Ok(exact) => {
                        let d = (r.mass - exact).abs();
                        let tol = rep.mass_tol * exact.max(1.0);
                        c.push("mass", case.clone(), d, format!("<= {tol:e}"), d <= tol);
                    }
                    Err(e) => c.error("mass", case.clone(), e),
                }
                c.push("tail", case.clone(), r.tail, "reported".into(), true);
                c.push("sup_outside", case.clone(), r.sup_outside, "reported".into(), true);
                c.push("pairing", case, r.pairing, "reported".into(), true);
            }
            let delta = format!("delta={}", v.delta);
            c.push("tail_decreasing", delta.clone(), rep.rows.last().map_or(0.0, |r| r.tail), "strict".into(), rep.tail_decreasing());
            c.push("sup_decreasing", delta.clone(), rep.rows.last().map_or(0.0, |r| r.sup_outside), "strict".into(), rep.sup_decreasing());
            c.push(
                "pairing_converging",
                "phi=exp(-|x|^2)".into(),
                rep.rows.last().map_or(0.0, |r| (r.pairing - 1.0).abs()),
                "strict".into(),
                rep.pairing_converging(),
            );
        }
        Err(e) => c.error("identity_suite", format!("delta={}", v.delta), e),
    }
    let eq = Equation::for_kernel(&kernel);
    let n = kernel.n();
    for row in &v.residual_points {
        let pt = Point::new(row[..n].to_vec(), row[n]);
        let case = format!("{} at ({:?}, {})", eq.name(), pt.x, pt.y);
        match residual_order(|p| kernel.eval(p), &pt, v.h, &eq) {
            Ok(o) => c.push("residual_order", case, o.order, "[1.8, 2.2]".into(), (1.8..=2.2).contains(&o.order)),
            Err(e) => c.error("residual_order", case, e),
        }
    }
    if v.oracle {
        oracle_checks(cfg, &kernel, &mut c);
    }
    let failed = c.failed;
    for r in c.rows {
        t.row(r.to_vec());
    }
    Ok(t.finish(if failed { EXIT_VERIFICATION } else { EXIT_OK }))
}

fn oracle_checks(cfg: &RunConfig, kernel: &Kernel, c: &mut CheckRows) {
    let v = &cfg.verify;
    if kernel.n() != 1 || kernel.form() == KernelForm::Q {
        c.error(
            "oracle",
            "n=1 transformed kernels only".into(),
            Error::Geometry("the oracle comparison needs n = 1 and a transformed kernel".into()),
        );
        return;
    }
    let psi = match &cfg.boundary {
        Some(b) => b.spec.clone(),
        None => BoundarySpec::line(
            vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, |t| (-t * t).exp())],
            Some(1.0),
        )
        .expect("static boundary data is valid"),
    };
    let mut errs = Vec::new();
    for step in [v.oracle_step, 0.5 * v.oracle_step] {
        let case = format!("h={step}");
        let res = FdBox::new(v.oracle_half_width, v.oracle_height, step, *kernel.params())
            .and_then(|b| oracle_vs_convolution(&psi, &b, v.oracle_compare_step, &cfg.quadrature));
        match res {
            Ok(r) => {
                c.push("oracle_max_abs", case, r.max_abs, "reported".into(), true);
                errs.push(r.max_abs);
            }
            Err(e) => c.error("oracle_max_abs", case, e),
        }
    }
    if let [a, b] = errs[..] {
        let ratio = a / b;
        c.push("oracle_ratio", "h -> h/2".into(), ratio, "[3.5, 4.5]".into(), (3.5..=4.5).contains(&ratio));
    }
}

fn example_points(cfg: &RunConfig) -> Vec<Point> {
    if !cfg.points.is_empty() {
        return cfg.points.clone();
    }
    let mut pts = Vec::new();
    for &x in &[-3.0, -1.0, -0.5, 0.0, 0.5, 1.0, 3.0] {
        for &y in &[0.1, 0.5, 1.0, 2.0] {
            pts.push(Point::on_line(x, y));
        }
    }
    pts.push(Point::on_line(-5.0, 1e-3));
    pts
}

pub fn cmd_example(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    if cfg.n() != 1 {
        return Err(ConfigError {
            field: "n".into(),
            message: "the worked example lives in the half-plane (n = 1)".into(),
        });
    }
    let header = [
        "x", "y", "g_closed", "g_quadrature", "u_closed", "u_from_derivative", "g_diff", "u_diff",
    ]
    .map(String::from);
    let mut t = Table::new(Command::Example, cfg, None, &header);
    t.note("boundary data x_+^(-3/2) via the antiderivative -2 t_+^(-1/2)".into());
    let pts = example_points(cfg);
    let rows: Vec<_> = pts
        .par_iter()
        .map(|p| -> Result<[f64; 4], Error> {
            let e = ExamplePoint::new(p.x[0], p.y)?;
            let h = 1e-5 * e.y.min(1.0);
            Ok([
                example_g(e)?,
                example_g_quadrature(e, &cfg.quadrature)?,
                example_u(e)?,
                example_u_from_derivative(e, h)?,
            ])
        })
        .collect();
    let mut exit = EXIT_OK;
    for (p, r) in pts.iter().zip(rows) {
        match r {
            Ok([g, gq, u, ud]) => t.row(vec![
                num(p.x[0]),
                num(p.y),
                num(g),
                num(gq),
                num(u),
                num(ud),
                num((g - gq).abs()),
                num((u - ud).abs()),
            ]),
            Err(e) => {
                if matches!(e, Error::NonConvergence { .. }) {
                    exit = EXIT_NONCONVERGENCE;
                }
                t.note(format!("error at ({}, {}): {e}", p.x[0], p.y));
            }
        }
    }
    Ok(t.finish(exit))
}

/// Runs one command on a parsed config.
pub fn run(command: Command, cfg: &RunConfig) -> Outcome {
    let r = match command {
        Command::Eval => cmd_eval(cfg),
        Command::Mass => cmd_mass(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Example => cmd_example(cfg),
    };
    r.unwrap_or_else(config_failure)
}

const DEFAULT_CONFIG: &str = "n = 1\nbeta = 0.0\nlambda = 0.0\n";

/// Entry point shared by the binary: parses arguments, runs, writes output
/// and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        // fails only if a global pool already exists, which is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return EXIT_CONFIG;
            }
        },
        None => DEFAULT_CONFIG.to_string(),
    };
    let cfg = match RunConfig::from_toml(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let outcome = run(cli.command, &cfg);
    if outcome.exit_code == EXIT_CONFIG {
        eprint!("{}", outcome.text);
        return EXIT_CONFIG;
    }
    let target = cli.out.clone().or_else(|| cfg.output.clone());
    let written = match &target {
        Some(path) => std::fs::write(path, &outcome.text),
        None => std::io::stdout().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return EXIT_IO;
    }
    outcome.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::KernelChoice;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_toml(text).unwrap()
    }

    fn data_rows(o: &Outcome) -> Vec<Vec<String>> {
        o.text
            .lines()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .map(|l| l.split(',').map(String::from).collect())
            .collect()
    }

    #[test]
    fn eval_poisson_value() {
        let o = run(Command::Eval, &cfg("n = 1\nbeta = 0\n[grid]\npoints = [[0.0, 1.0]]\n"));
        assert_eq!(o.exit_code, 0);
        let v: f64 = data_rows(&o)[0][2].parse().unwrap();
        assert!((v - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn eval_empty_grid_is_header_only() {
        let o = run(Command::Eval, &cfg("n = 1\nbeta = 0\n"));
        assert_eq!(o.exit_code, 0);
        assert!(data_rows(&o).is_empty());
        assert!(o.text.contains("x,y,value,error"));
    }

    #[test]
    fn eval_reports_row_errors_and_continues() {
        let o = run(Command::Eval, &cfg("n = 1\nbeta = 0\n[grid]\npoints = [[0.0, 0.0], [0.0, 1.0]]\n"));
        let rows = data_rows(&o);
        assert_eq!(rows.len(), 2);
        assert!(rows[0][2].is_empty() && !rows[0][3].is_empty());
        assert!(!rows[1][2].is_empty());
    }

    #[test]
    fn mass_rows() {
        let o = run(Command::Mass, &cfg("n = 1\nbeta = 0\n[mass]\ny = [1.0, 0.1]\n"));
        for r in data_rows(&o) {
            assert_eq!(r[2], "NA");
            assert!(r[3].parse::<f64>().unwrap() < 1e-8);
        }
        let o = run(Command::Mass, &cfg("n = 1\nbeta = 0\nlambda = 1\n[mass]\ny = [1.0]\n"));
        let r = &data_rows(&o)[0];
        assert!((r[2].parse::<f64>().unwrap() - (-1f64).exp()).abs() < 1e-13);
        assert!(r[3].parse::<f64>().unwrap() < 1e-8);
    }

    #[test]
    fn solve_needs_boundary() {
        let o = run(Command::Solve, &cfg("n = 1\nbeta = 0\n"));
        assert_eq!(o.exit_code, EXIT_CONFIG);
    }

    #[test]
    fn q_kernel_requires_original_parameters() {
        let c = cfg("n = 1\nm = 1\nalpha = 0\nkernel = \"q\"\n[grid]\npoints = [[0.0, 1.0]]\n");
        assert_eq!(c.kernel, KernelChoice::Q);
        let o = run(Command::Eval, &c);
        let v: f64 = data_rows(&o)[0][2].parse().unwrap();
        assert!((v - 0.25).abs() < 1e-14);
    }
}

//! Run configuration for the command-line front end (TOML).
//!
//! ```toml
//! n = 1
//! beta = 0.0          # or: m = 1.0, alpha = 0.0
//! lambda = 0.0
//! kernel = "auto"     # auto | p0 | plambda | q
//! output = "out.csv"
//!
//! [quadrature]
//! rel_tol = 1e-8
//!
//! [grid]
//! x = [-1.0, 0.0, 1.0]    # every x coordinate ranges over this list
//! y = [0.5, 1.0]
//! points = [[0.0, 1.0]]   # extra explicit (x..., y) rows
//!
//! [mass]
//! y = [1.0, 0.1]
//!
//! [[boundary.pieces]]
//! lo = "0"
//! hi = "inf"
//! expr = "-2 * t^(-0.5)"
//! lo_exponent = -0.5
//!
//! [verify]
//! y = [1.0, 0.1, 0.01]
//! delta = 1.0
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use serde::Deserialize;

use crate::convolve::{BoundarySpec, Piece};
use crate::expr::Expr;
use crate::kernels::{to_transformed, Kernel, Point, ProblemParams, TransformedParams};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error in '{field}': {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

fn cfg_err(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: Option<usize>,
    m: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    kernel: Option<String>,
    output: Option<PathBuf>,
    quadrature: Option<RawQuadrature>,
    grid: Option<RawGrid>,
    mass: Option<RawMass>,
    boundary: Option<RawBoundary>,
    verify: Option<RawVerify>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    max_subdivisions: Option<usize>,
    truncation_mass: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x: Option<Vec<f64>>,
    y: Option<Vec<f64>>,
    points: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMass {
    y: Vec<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPiece {
    lo: String,
    hi: String,
    expr: String,
    lo_exponent: Option<f64>,
    hi_exponent: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    pieces: Option<Vec<RawPiece>>,
    radial: Option<String>,
    field: Option<String>,
    bound: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVerify {
    y: Option<Vec<f64>>,
    delta: Option<f64>,
    h: Option<f64>,
    residual_points: Option<Vec<Vec<f64>>>,
    oracle: Option<bool>,
    oracle_half_width: Option<f64>,
    oracle_height: Option<f64>,
    oracle_step: Option<f64>,
    oracle_compare_step: Option<f64>,
    constant_scale: Option<f64>,
}

/// How the equation parameters were given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Parameterization {
    Original(ProblemParams),
    Transformed(TransformedParams),
}

impl Parameterization {
    pub fn transformed(&self) -> TransformedParams {
        match self {
            Parameterization::Original(p) => {
                to_transformed(p).expect("validated at load time")
            }
            Parameterization::Transformed(t) => *t,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Parameterization::Original(p) => {
                let t = self.transformed();
                format!(
                    "n={} m={} alpha={} lambda={} (beta={})",
                    p.n, p.m, p.alpha, p.lambda, t.beta
                )
            }
            Parameterization::Transformed(t) => {
                format!("n={} beta={} lambda={}", t.n, t.beta, t.lambda)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelChoice {
    Auto,
    P0,
    PLambda,
    Q,
}

/// Boundary data as written in the config, kept for reporting.
#[derive(Clone, Debug)]
pub struct BoundaryConfig {
    pub spec: BoundarySpec,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub y: Vec<f64>,
    pub delta: f64,
    pub h: f64,
    /// `(x..., y)` rows for residual order checks.
    pub residual_points: Vec<Vec<f64>>,
    pub oracle: bool,
    pub oracle_half_width: f64,
    pub oracle_height: f64,
    pub oracle_step: f64,
    pub oracle_compare_step: f64,
    pub constant_scale: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: Parameterization,
    pub kernel: KernelChoice,
    pub quadrature: QuadratureConfig,
    pub points: Vec<Point>,
    pub mass_heights: Vec<f64>,
    pub boundary: Option<BoundaryConfig>,
    pub verify: VerifyConfig,
    pub output: Option<PathBuf>,
}

fn finite_list(field: &str, v: &[f64]) -> Result<(), ConfigError> {
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(cfg_err(field, format!("value {bad} is not finite")));
    }
    Ok(())
}

fn endpoint(field: &str, src: &str) -> Result<f64, ConfigError> {
    let v = Expr::constant(src).map_err(|e| cfg_err(field, e.to_string()))?;
    if v.is_nan() {
        return Err(cfg_err(field, "endpoint is NaN"));
    }
    Ok(v)
}

fn build_boundary(raw: RawBoundary, n: usize) -> Result<BoundaryConfig, ConfigError> {
    let given = [raw.pieces.is_some(), raw.radial.is_some(), raw.field.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if given != 1 {
        return Err(cfg_err(
            "boundary",
            "give exactly one of 'pieces', 'radial' or 'field'",
        ));
    }
    if let Some(b) = raw.bound {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(cfg_err("boundary.bound", "must be finite and >= 0"));
        }
    }
    let to_cfg = |e: crate::Error, field: &str| cfg_err(field, e.to_string());
    if let Some(pieces) = raw.pieces {
        if n != 1 {
            return Err(cfg_err(
                "boundary.pieces",
                "piecewise data is only available for n = 1; use 'radial' or 'field'",
            ));
        }
        let mut out = Vec::with_capacity(pieces.len());
        let mut text = Vec::with_capacity(pieces.len());
        for (k, p) in pieces.into_iter().enumerate() {
            let field = format!("boundary.pieces[{k}]");
            let lo = endpoint(&format!("{field}.lo"), &p.lo)?;
            let hi = endpoint(&format!("{field}.hi"), &p.hi)?;
            let expr = Arc::new(
                Expr::parse(&p.expr, &["t"])
                    .map_err(|e| cfg_err(format!("{field}.expr"), e.to_string()))?,
            );
            text.push(format!("({lo},{hi}):{}", p.expr));
            out.push(
                Piece::new(lo, hi, move |t| expr.eval(&[t]))
                    .with_exponents(p.lo_exponent.unwrap_or(0.0), p.hi_exponent.unwrap_or(0.0)),
            );
        }
        let spec =
            BoundarySpec::line(out, raw.bound).map_err(|e| to_cfg(e, "boundary.pieces"))?;
        return Ok(BoundaryConfig {
            spec,
            description: text.join(" "),
        });
    }
    if let Some(src) = raw.radial {
        let expr = Expr::parse(&src, &["r"]).map_err(|e| cfg_err("boundary.radial", e.to_string()))?;
        let spec = BoundarySpec::radial(n, move |r| expr.eval(&[r]), raw.bound)
            .map_err(|e| to_cfg(e, "boundary.radial"))?;
        return Ok(BoundaryConfig {
            spec,
            description: format!("radial:{src}"),
        });
    }
    let src = raw.field.unwrap_or_default();
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let expr = Expr::parse(&src, &refs).map_err(|e| cfg_err("boundary.field", e.to_string()))?;
    let spec = BoundarySpec::field(n, move |t| expr.eval(t), raw.bound)
        .map_err(|e| to_cfg(e, "boundary.field"))?;
    Ok(BoundaryConfig {
        spec,
        description: format!("field:{src}"),
    })
}

fn params_from(raw: &RawConfig) -> Result<Parameterization, ConfigError> {
    let n = raw.n.ok_or_else(|| cfg_err("n", "missing"))?;
    let lambda = raw.lambda.unwrap_or(0.0);
    let original = raw.m.is_some() || raw.alpha.is_some();
    match (original, raw.beta) {
        (true, Some(_)) => Err(cfg_err(
            "beta",
            "give either (m, alpha) or beta, not both",
        )),
        (false, None) => Err(cfg_err("beta", "missing: give either (m, alpha) or beta")),
        (true, None) => {
            let m = raw.m.ok_or_else(|| cfg_err("m", "missing (alpha was given)"))?;
            let alpha = raw.alpha.ok_or_else(|| cfg_err("alpha", "missing (m was given)"))?;
            let p = ProblemParams::new(n, m, alpha, lambda).map_err(param_err)?;
            Ok(Parameterization::Original(p))
        }
        (false, Some(beta)) => {
            let t = TransformedParams::new(n, beta, lambda).map_err(param_err)?;
            Ok(Parameterization::Transformed(t))
        }
    }
}

fn param_err(e: crate::Error) -> ConfigError {
    match &e {
        crate::Error::Parameter { name, .. } => cfg_err(*name, e.to_string()),
        _ => cfg_err("params", e.to_string()),
    }
}

fn grid_points(raw: Option<RawGrid>, n: usize) -> Result<Vec<Point>, ConfigError> {
    let Some(g) = raw else {
        return Ok(Vec::new());
    };
    let mut points = Vec::new();
    match (g.x, g.y) {
        (Some(xs), Some(ys)) => {
            finite_list("grid.x", &xs)?;
            finite_list("grid.y", &ys)?;
            // lexicographic over (x_1, ..., x_n, y) in list order
            let total = xs.len().pow(n as u32);
            for flat in 0..total {
                let mut rem = flat;
                let mut x = vec![0.0; n];
                for d in (0..n).rev() {
                    x[d] = xs[rem % xs.len()];
                    rem /= xs.len();
                }
                for &y in &ys {
                    points.push(Point::new(x.clone(), y));
                }
            }
        }
        (None, None) => {}
        (Some(_), None) => return Err(cfg_err("grid.y", "missing (grid.x was given)")),
        (None, Some(_)) => return Err(cfg_err("grid.x", "missing (grid.y was given)")),
    }
    for (k, row) in g.points.unwrap_or_default().into_iter().enumerate() {
        let field = format!("grid.points[{k}]");
        if row.len() != n + 1 {
            return Err(cfg_err(field, format!("expected {} coordinates (x..., y)", n + 1)));
        }
        finite_list(&field, &row)?;
        points.push(Point::new(row[..n].to_vec(), row[n]));
    }
    Ok(points)
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let at = e
                .span()
                .map(|s| {
                    let line = text[..s.start.min(text.len())].matches('\n').count() + 1;
                    format!("line {line}")
                })
                .unwrap_or_else(|| "document".into());
            cfg_err(at, e.message().to_string())
        })?;
        let params = params_from(&raw)?;
        let n = params.transformed().n;
        let kernel = match raw.kernel.as_deref().unwrap_or("auto") {
            "auto" => KernelChoice::Auto,
            "p0" => KernelChoice::P0,
            "plambda" => KernelChoice::PLambda,
            "q" => KernelChoice::Q,
            other => {
                return Err(cfg_err(
                    "kernel",
                    format!("unknown kernel '{other}' (auto, p0, plambda, q)"),
                ))
            }
        };
        if kernel == KernelChoice::Q && !matches!(params, Parameterization::Original(_)) {
            return Err(cfg_err("kernel", "the q kernel needs the (m, alpha) parameterization"));
        }
        let q = raw.quadrature.unwrap_or_default();
        let d = QuadratureConfig::default();
        let quadrature = QuadratureConfig {
            rel_tol: q.rel_tol.unwrap_or(d.rel_tol),
            abs_tol: q.abs_tol.unwrap_or(d.abs_tol),
            max_subdivisions: q.max_subdivisions.unwrap_or(d.max_subdivisions),
            truncation_mass: q.truncation_mass.unwrap_or(d.truncation_mass),
        };
        quadrature.validate().map_err(|e| match &e {
            crate::Error::Parameter { name, .. } => cfg_err(format!("quadrature.{name}"), e.to_string()),
            _ => cfg_err("quadrature", e.to_string()),
        })?;
        let points = grid_points(raw.grid, n)?;
        let mass_heights = raw.mass.map(|m| m.y).unwrap_or_else(|| vec![1.0, 0.1, 0.01]);
        finite_list("mass.y", &mass_heights)?;
        let boundary = raw.boundary.map(|b| build_boundary(b, n)).transpose()?;
        let v = raw.verify.unwrap_or_default();
        let verify = VerifyConfig {
            y: v.y.unwrap_or_else(|| vec![1.0, 0.1, 0.01]),
            delta: v.delta.unwrap_or(1.0),
            h: v.h.unwrap_or(0.02),
            residual_points: v.residual_points.unwrap_or_else(|| {
                [(1.0, 1.0), (0.5, 2.0), (-1.0, 0.5), (0.3, 0.7)]
                    .iter()
                    .map(|&(x, y)| {
                        let mut row = vec![0.0; n + 1];
                        row[0] = x;
                        row[n] = y;
                        row
                    })
                    .collect()
            }),
            oracle: v.oracle.unwrap_or(false),
            oracle_half_width: v.oracle_half_width.unwrap_or(2.0),
            oracle_height: v.oracle_height.unwrap_or(1.0),
            oracle_step: v.oracle_step.unwrap_or(1.0 / 64.0),
            oracle_compare_step: v.oracle_compare_step.unwrap_or(0.125),
            constant_scale: v.constant_scale.unwrap_or(1.0),
        };
        finite_list("verify.y", &verify.y)?;
        for (k, row) in verify.residual_points.iter().enumerate() {
            if row.len() != n + 1 {
                return Err(cfg_err(
                    format!("verify.residual_points[{k}]"),
                    format!("expected {} coordinates (x..., y)", n + 1),
                ));
            }
        }
        if !(verify.constant_scale > 0.0) || !verify.constant_scale.is_finite() {
            return Err(cfg_err("verify.constant_scale", "must be positive"));
        }
        if !(verify.h > 0.0) {
            return Err(cfg_err("verify.h", "must be positive"));
        }
        Ok(RunConfig {
            params,
            kernel,
            quadrature,
            points,
            mass_heights,
            boundary,
            verify,
            output: raw.output,
        })
    }

    pub fn n(&self) -> usize {
        self.params.transformed().n
    }

    /// The kernel selected by `kernel` and the parameterization.
    pub fn build_kernel(&self) -> Result<Kernel, ConfigError> {
        let tp = self.params.transformed();
        let k = match self.kernel {
            KernelChoice::Auto => Ok(Kernel::transformed(tp)),
            KernelChoice::P0 => Kernel::p0(tp),
            KernelChoice::PLambda => Kernel::plambda(tp),
            KernelChoice::Q => match self.params {
                Parameterization::Original(p) => Kernel::q(p),
                Parameterization::Transformed(_) => unreachable!("rejected at load time"),
            },
        };
        k.map_err(|e| cfg_err("kernel", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = RunConfig::from_toml("n = 1\nbeta = 0.5\n").unwrap();
        assert_eq!(c.params.transformed().beta, 0.5);
        assert!(c.points.is_empty());
        assert_eq!(c.kernel, KernelChoice::Auto);
    }

    #[test]
    fn original_parameterization() {
        let c = RunConfig::from_toml("n = 2\nm = 1.0\nalpha = 0.0\nkernel = \"q\"\n").unwrap();
        assert_eq!(c.params.transformed().beta, -1.0);
        assert_eq!(c.build_kernel().unwrap().form(), crate::kernels::KernelForm::Q);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_toml("n = 1\nbeta = 0.5\nm = 1.0\nalpha = 0.0\n").unwrap_err();
        assert_eq!(e.field, "beta");
        let e = RunConfig::from_toml("n = 1\nm = 1.0\n").unwrap_err();
        assert_eq!(e.field, "alpha");
        let e = RunConfig::from_toml("n = 1\nbeta = 1.5\n").unwrap_err();
        assert_eq!(e.field, "beta");
        let e = RunConfig::from_toml("n = 1\nbeta = 0\nkernel = \"q\"\n").unwrap_err();
        assert_eq!(e.field, "kernel");
        let e = RunConfig::from_toml("n = 1\nbeta = 0\n[quadrature]\nrel_tol = 2.0\n").unwrap_err();
        assert_eq!(e.field, "quadrature.rel_tol");
        let e = RunConfig::from_toml("n = 1\nbeta = 0\n\nbogus = 3\n").unwrap_err();
        assert_eq!(e.field, "line 4");
        let e = RunConfig::from_toml(
            "n = 1\nbeta = 0\n[[boundary.pieces]]\nlo = \"0\"\nhi = \"inf\"\nexpr = \"1 +\"\n",
        )
        .unwrap_err();
        assert_eq!(e.field, "boundary.pieces[0].expr");
    }

    #[test]
    fn grid_is_lexicographic() {
        let c = RunConfig::from_toml("n = 2\nbeta = 0\n[grid]\nx = [0.0, 1.0]\ny = [1.0, 2.0]\n").unwrap();
        let rows: Vec<(f64, f64, f64)> = c.points.iter().map(|p| (p.x[0], p.x[1], p.y)).collect();
        assert_eq!(rows.len(), 8);
        let mut sorted = rows.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(rows, sorted);
        let e = RunConfig::from_toml("n = 1\nbeta = 0\n[grid]\npoints = [[1.0]]\n").unwrap_err();
        assert_eq!(e.field, "grid.points[0]");
    }

    #[test]
    fn boundary_pieces() {
        let c = RunConfig::from_toml(
            "n = 1\nbeta = 0\n[boundary]\nbound = 1.0\n[[boundary.pieces]]\nlo = \"0\"\nhi = \"inf\"\nexpr = \"1\"\n",
        )
        .unwrap();
        let b = c.boundary.unwrap();
        assert_eq!(b.spec.eval(&[1.0]), 1.0);
        assert_eq!(b.spec.eval(&[-1.0]), 0.0);
    }
}

//! Boundary data and the quadrature engine for `u = ψ * P`.
//!
//! Every integral against a kernel is written in polar form around the
//! evaluation point:
//!
//! ```text
//! u(x, y) = σ_(n-1) ∫_0^R  ρ^(n-1) P(ρ, y) M_ψ(x, ρ) dρ
//! ```
//!
//! where `M_ψ(x, ρ)` is the mean of `ψ` over the sphere of radius `ρ`
//! centred at `x` (for `n = 1` the average of `ψ(x + ρ)` and `ψ(x - ρ)`).
//! The radial range is split at the kernel scale `η` (the transformed
//! height): `[0, η]` is integrated directly and `[η, R]` through
//! `ρ = η w^(-1/(1-β))`, which makes the algebraic `ρ^(β-2)` tail of the
//! radial measure exactly flat in `w`. Jumps and endpoint singularities of
//! one-dimensional data become breakpoints of the radial variable.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::kernels::{Kernel, Point, RadialProfile};
use crate::quadrature::{try_integrate, QuadEstimate, QuadratureConfig, Segment};
use crate::specfun::sphere_area;

pub type LineFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One piece of one-dimensional boundary data, supported on `(lo, hi)`.
#[derive(Clone)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub f: LineFn,
    /// `ψ ~ |t - lo|^lo_exponent` near `lo`, exponent in `(-1, 0]`.
    pub lo_exponent: f64,
    pub hi_exponent: f64,
}

impl std::fmt::Debug for Piece {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Piece")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("lo_exponent", &self.lo_exponent)
            .field("hi_exponent", &self.hi_exponent)
            .finish_non_exhaustive()
    }
}

impl Piece {
    pub fn new(lo: f64, hi: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Piece {
            lo,
            hi,
            f: Arc::new(f),
            lo_exponent: 0.0,
            hi_exponent: 0.0,
        }
    }

    pub fn with_exponents(mut self, lo_exponent: f64, hi_exponent: f64) -> Self {
        self.lo_exponent = lo_exponent;
        self.hi_exponent = hi_exponent;
        self
    }

    fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }
}

/// Values on a regular two-dimensional grid, bilinearly interpolated and
/// zero outside the sampled rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub shape: [usize; 2],
    /// Row-major: `values[i * shape[1] + j]` sits at `origin + (i hx, j hy)`.
    pub values: Vec<f64>,
}

impl GridSamples {
    fn validate(&self) -> Result<()> {
        if self.shape[0] < 2 || self.shape[1] < 2 {
            return Err(Error::Boundary("sample grid needs at least 2x2 nodes".into()));
        }
        if self.values.len() != self.shape[0] * self.shape[1] {
            return Err(Error::Boundary(format!(
                "expected {} samples, got {}",
                self.shape[0] * self.shape[1],
                self.values.len()
            )));
        }
        if !(self.spacing[0] > 0.0 && self.spacing[1] > 0.0) {
            return Err(Error::Boundary("sample spacing must be positive".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Boundary("samples must be finite".into()));
        }
        Ok(())
    }

    pub fn eval(&self, t: &[f64]) -> f64 {
        let u = (t[0] - self.origin[0]) / self.spacing[0];
        let v = (t[1] - self.origin[1]) / self.spacing[1];
        let (nu, nv) = ((self.shape[0] - 1) as f64, (self.shape[1] - 1) as f64);
        if !(u >= 0.0 && v >= 0.0 && u <= nu && v <= nv) {
            return 0.0;
        }
        let i = (u.floor() as usize).min(self.shape[0] - 2);
        let j = (v.floor() as usize).min(self.shape[1] - 2);
        let (fu, fv) = (u - i as f64, v - j as f64);
        let at = |a: usize, b: usize| self.values[a * self.shape[1] + b];
        (1.0 - fu) * ((1.0 - fv) * at(i, j) + fv * at(i, j + 1))
            + fu * ((1.0 - fv) * at(i + 1, j) + fv * at(i + 1, j + 1))
    }
}

#[derive(Clone)]
enum BoundaryData {
    Line(Vec<Piece>),
    Radial(LineFn),
    TensorProduct(Vec<Vec<Piece>>),
    Samples(GridSamples),
    Field(FieldFn),
}

/// Boundary data `ψ` on `R^n` with an optional declared bound `|ψ| <= M`.
#[derive(Clone)]
pub struct BoundarySpec {
    dim: usize,
    data: BoundaryData,
    bound: Option<f64>,
}

impl std::fmt::Debug for BoundarySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.data {
            BoundaryData::Line(p) => format!("Line({} pieces)", p.len()),
            BoundaryData::Radial(_) => "Radial".into(),
            BoundaryData::TensorProduct(_) => "TensorProduct".into(),
            BoundaryData::Samples(_) => "Samples".into(),
            BoundaryData::Field(_) => "Field".into(),
        };
        f.debug_struct("BoundarySpec")
            .field("dim", &self.dim)
            .field("data", &kind)
            .field("bound", &self.bound)
            .finish()
    }
}

fn line_eval(pieces: &[Piece], t: f64) -> f64 {
    pieces
        .iter()
        .find(|p| p.contains(t))
        .map_or(0.0, |p| (p.f)(t))
}

fn validate_pieces(pieces: &[Piece]) -> Result<()> {
    for (k, p) in pieces.iter().enumerate() {
        if p.lo.is_nan() || p.hi.is_nan() || !(p.lo < p.hi) {
            return Err(Error::Boundary(format!(
                "piece {k}: support ({}, {}) is empty",
                p.lo, p.hi
            )));
        }
        for (e, end) in [(p.lo_exponent, p.lo), (p.hi_exponent, p.hi)] {
            if !(e > -1.0 && e <= 0.0) {
                return Err(Error::Boundary(format!(
                    "piece {k}: singularity exponent {e} must lie in (-1, 0]"
                )));
            }
            if e < 0.0 && !end.is_finite() {
                return Err(Error::Boundary(format!(
                    "piece {k}: singularity exponent given at an infinite end"
                )));
            }
        }
    }
    let mut sorted: Vec<&Piece> = pieces.iter().collect();
    sorted.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    for w in sorted.windows(2) {
        if w[1].lo < w[0].hi {
            return Err(Error::Boundary(format!(
                "pieces ({}, {}) and ({}, {}) overlap",
                w[0].lo, w[0].hi, w[1].lo, w[1].hi
            )));
        }
    }
    Ok(())
}

/// Interior sample abscissae of an interval, infinite ends allowed.
fn sample_interval(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.max(-1e300), hi.min(1e300));
    let ta = a.atan();
    let tb = b.atan();
    (1..=count)
        .map(|k| {
            let s = k as f64 / (count + 1) as f64;
            if lo.is_finite() && hi.is_finite() {
                lo + s * (hi - lo)
            } else {
                (ta + s * (tb - ta)).tan()
            }
        })
        .collect()
}

impl BoundarySpec {
    /// Piecewise data on the line; `ψ = 0` off the pieces.
    pub fn line(pieces: Vec<Piece>, bound: Option<f64>) -> Result<Self> {
        validate_pieces(&pieces)?;
        let spec = BoundarySpec {
            dim: 1,
            data: BoundaryData::Line(pieces),
            bound,
        };
        spec.check_bound()?;
        Ok(spec)
    }

    /// `ψ(t) = profile(|t|)` on `R^n`.
    pub fn radial(
        dim: usize,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bound: Option<f64>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let spec = BoundarySpec {
            dim,
            data: BoundaryData::Radial(Arc::new(profile)),
            bound,
        };
        spec.check_bound()?;
        Ok(spec)
    }

    /// `ψ(t) = Π_i ψ_i(t_i)` with each factor piecewise on the line.
    pub fn tensor_product(factors: Vec<Vec<Piece>>, bound: Option<f64>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Boundary("tensor product needs at least one factor".into()));
        }
        for f in &factors {
            validate_pieces(f)?;
            if f.iter().any(|p| p.lo_exponent < 0.0 || p.hi_exponent < 0.0) {
                return Err(Error::Boundary(
                    "singular endpoints are only supported for one-dimensional data".into(),
                ));
            }
        }
        let spec = BoundarySpec {
            dim: factors.len(),
            data: BoundaryData::TensorProduct(factors),
            bound,
        };
        spec.check_bound()?;
        Ok(spec)
    }

    /// Bilinearly interpolated samples on `R^2`.
    pub fn samples(grid: GridSamples) -> Result<Self> {
        grid.validate()?;
        let bound = grid.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(BoundarySpec {
            dim: 2,
            data: BoundaryData::Samples(grid),
            bound: Some(bound),
        })
    }

    /// Arbitrary bounded evaluator on `R^n`.
    pub fn field(
        dim: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        bound: Option<f64>,
    ) -> Result<Self> {
        check_dim(dim)?;
        let spec = BoundarySpec {
            dim,
            data: BoundaryData::Field(Arc::new(f)),
            bound,
        };
        spec.check_bound()?;
        Ok(spec)
    }

    /// `ψ ≡ c` on `R^n`.
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        if dim == 1 {
            Self::line(vec![Piece::new(f64::NEG_INFINITY, f64::INFINITY, move |_| c)], Some(c.abs()))
        } else {
            Self::radial(dim, move |_| c, Some(c.abs()))
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bound(&self) -> Option<f64> {
        self.bound
    }

    /// `ψ(t)`.
    pub fn eval(&self, t: &[f64]) -> f64 {
        match &self.data {
            BoundaryData::Line(p) => line_eval(p, t[0]),
            BoundaryData::Radial(f) => f(t.iter().fold(0.0f64, |a, v| a.hypot(*v))),
            BoundaryData::TensorProduct(factors) => factors
                .iter()
                .zip(t)
                .map(|(p, &ti)| line_eval(p, ti))
                .product(),
            BoundaryData::Samples(g) => g.eval(t),
            BoundaryData::Field(f) => f(t),
        }
    }

    fn check_bound(&self) -> Result<()> {
        let Some(m) = self.bound else {
            return Ok(());
        };
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::Boundary(format!("declared bound {m} must be finite and >= 0")));
        }
        let tol = 1e-12 * m.max(1.0);
        let check = |v: f64, at: String| -> Result<()> {
            if !v.is_finite() || v.abs() > m + tol {
                return Err(Error::Boundary(format!(
                    "|psi({at})| = {} exceeds the declared bound {m}",
                    v.abs()
                )));
            }
            Ok(())
        };
        match &self.data {
            BoundaryData::Line(pieces) => {
                for p in pieces {
                    for t in sample_interval(p.lo, p.hi, 64) {
                        check((p.f)(t), format!("{t}"))?;
                    }
                }
            }
            BoundaryData::TensorProduct(factors) => {
                // the product bound is checked on the diagonal of per-factor samples
                let samples: Vec<Vec<f64>> = factors
                    .iter()
                    .map(|f| f.iter().flat_map(|p| sample_interval(p.lo, p.hi, 32)).collect())
                    .collect();
                let len = samples.iter().map(Vec::len).min().unwrap_or(0);
                for k in 0..len {
                    let t: Vec<f64> = samples.iter().map(|s| s[k]).collect();
                    check(self.eval(&t), format!("{t:?}"))?;
                }
            }
            _ => {
                for r in sample_interval(0.0, f64::INFINITY, 64) {
                    let mut t = vec![0.0; self.dim];
                    for (i, ti) in t.iter_mut().enumerate() {
                        *ti = if i % 2 == 0 { r } else { -0.5 * r };
                    }
                    check(self.eval(&t), format!("{t:?}"))?;
                }
            }
        }
        Ok(())
    }

    /// Breakpoints `(ρ, exponent)` of the radial variable around `x` for
    /// line data: distances to every finite piece endpoint.
    fn radial_breakpoints(&self, x: &[f64]) -> Vec<(f64, f64)> {
        let BoundaryData::Line(pieces) = &self.data else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for p in pieces {
            for (end, e) in [(p.lo, p.lo_exponent), (p.hi, p.hi_exponent)] {
                if end.is_finite() {
                    out.push(((end - x[0]).abs(), e));
                }
            }
        }
        out
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 1 {
        return Err(Error::Boundary("dimension must be at least 1".into()));
    }
    Ok(())
}

/// Splits `[a, b]` at the interior breakpoints, attaching exponents to the
/// sides of each segment that touch a singular breakpoint.
fn split_segments(a: f64, b: f64, a_exp: f64, breaks: &[(f64, f64)]) -> Vec<Segment> {
    let mut pts: Vec<(f64, f64)> = breaks
        .iter()
        .copied()
        .filter(|(v, _)| *v > a && *v < b)
        .collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    // merge coincident breakpoints, keeping the strongest singularity
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (v, e) in pts {
        match merged.last_mut() {
            Some(last) if (v - last.0).abs() <= 4.0 * f64::EPSILON * v.abs().max(1.0) => {
                last.1 = last.1.min(e);
            }
            _ => merged.push((v, e)),
        }
    }
    let mut segs = Vec::with_capacity(merged.len() + 1);
    let mut lo = a;
    let mut lo_exp = a_exp;
    for (v, e) in merged {
        segs.push(Segment::with_exponents(lo, v, lo_exp, e));
        lo = v;
        lo_exp = e;
    }
    segs.push(Segment::with_exponents(lo, b, lo_exp, 0.0));
    segs
}

/// Integrates `σ_(n-1) ρ^(n-1) P(ρ) g(ρ)` over `ρ ∈ [from, to]`.
///
/// `eta` is the kernel scale (transformed height), `beta` fixes the tail
/// map. `breaks` lists `(ρ, exponent)` pairs to be resolved exactly.
#[allow(clippy::too_many_arguments)]
fn radial_integral<G>(
    profile: &RadialProfile,
    n: usize,
    eta: f64,
    beta: f64,
    from: f64,
    to: f64,
    breaks: &[(f64, f64)],
    mut g: G,
    cfg: &QuadratureConfig,
) -> Result<QuadEstimate>
where
    G: FnMut(f64) -> Result<f64>,
{
    let sigma = sphere_area(n)?;
    let q = 1.0 / (1.0 - beta);
    let nm1 = (n - 1) as i32;
    // v in [0, eta] is rho itself; v in (eta, eta + 1] is w = 1 - (v - eta)
    let to_v = |rho: f64| -> f64 {
        if rho <= eta {
            rho
        } else if rho.is_infinite() {
            eta + 1.0
        } else {
            eta + 1.0 - (eta / rho).powf(1.0 / q)
        }
    };
    let v_lo = to_v(from);
    let v_hi = to_v(to);
    if !(v_hi > v_lo) {
        return Ok(QuadEstimate {
            value: 0.0,
            abs_err: 0.0,
            evaluations: 0,
        });
    }
    let mut vbreaks: Vec<(f64, f64)> = breaks.iter().map(|&(r, e)| (to_v(r), e)).collect();
    if v_lo < eta && eta < v_hi {
        vbreaks.push((eta, 0.0));
    }
    let start_exp = breaks
        .iter()
        .filter(|(r, _)| *r == from)
        .fold(0.0f64, |m, (_, e)| m.min(*e));
    let segments = split_segments(v_lo, v_hi, start_exp, &vbreaks);

    let integrand = |v: f64| -> Result<f64> {
        let (rho, jac) = if v <= eta {
            (v, 1.0)
        } else {
            let w = eta + 1.0 - v;
            let rho = eta * w.powf(-q);
            (rho, q * rho / w)
        };
        if !rho.is_finite() || !jac.is_finite() {
            return Ok(0.0);
        }
        let k = profile.value(rho)?;
        if k == 0.0 {
            return Ok(0.0);
        }
        let gv = g(rho)?;
        Ok(sigma * rho.powi(nm1) * k * jac * gv)
    };
    try_integrate(integrand, &segments, cfg)
}

/// Mean of `ψ` over the sphere of radius `rho` centred at `x`.
fn spherical_mean(psi: &BoundarySpec, x: &[f64], rho: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let n = x.len();
    if rho == 0.0 {
        return Ok(psi.eval(x));
    }
    if n == 1 {
        return Ok(0.5 * (psi.eval(&[x[0] + rho]) + psi.eval(&[x[0] - rho])));
    }
    let inner = cfg.tightened(0.1);
    if let BoundaryData::Radial(f) = &psi.data {
        let d = x.iter().fold(0.0f64, |a, v| a.hypot(*v));
        if d == 0.0 {
            return Ok(f(rho));
        }
        let dist = |c: f64| (d * d + rho * rho + 2.0 * d * rho * c).max(0.0).sqrt();
        return match n {
            2 => {
                let est = try_integrate(
                    |theta| Ok(f(dist(theta.cos()))),
                    &[Segment::new(0.0, 0.5 * PI), Segment::new(0.5 * PI, PI)],
                    &inner,
                )?;
                Ok(est.value / PI)
            }
            3 => {
                // with c = cos(phi) the surface measure is uniform in c
                let est = try_integrate(
                    |c| Ok(f(dist(c))),
                    &[Segment::new(-1.0, 0.0), Segment::new(0.0, 1.0)],
                    &inner,
                )?;
                Ok(0.5 * est.value)
            }
            _ => Err(domain("spherical_mean", format!("dimension {n} is not supported"))),
        };
    }
    let quadrants: Vec<Segment> = (0..4)
        .map(|k| Segment::new(0.5 * PI * k as f64, 0.5 * PI * (k + 1) as f64))
        .collect();
    match n {
        2 => {
            let mut t = [0.0; 2];
            let est = try_integrate(
                |theta| {
                    t[0] = x[0] + rho * theta.cos();
                    t[1] = x[1] + rho * theta.sin();
                    Ok(psi.eval(&t))
                },
                &quadrants,
                &inner,
            )?;
            Ok(est.value / (2.0 * PI))
        }
        3 => {
            let inner2 = inner.tightened(0.1);
            let est = try_integrate(
                |c| {
                    let s = (1.0 - c * c).max(0.0).sqrt();
                    let mut t = [0.0; 3];
                    let ring = try_integrate(
                        |theta| {
                            t[0] = x[0] + rho * s * theta.cos();
                            t[1] = x[1] + rho * s * theta.sin();
                            t[2] = x[2] + rho * c;
                            Ok(psi.eval(&t))
                        },
                        &quadrants,
                        &inner2,
                    )?;
                    Ok(ring.value)
                },
                &[Segment::new(-1.0, 0.0), Segment::new(0.0, 1.0)],
                &inner,
            )?;
            Ok(est.value / (4.0 * PI))
        }
        _ => Err(domain("spherical_mean", format!("dimension {n} is not supported"))),
    }
}

/// Per-point error accounting of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDiagnostics {
    /// Quadrature error estimate.
    pub quad_err: f64,
    /// Bound on the neglected tail, `M * ε_tail`; `None` without a declared bound.
    pub truncation_bound: Option<f64>,
    pub truncation_radius: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl PointDiagnostics {
    /// Quadrature estimate plus truncation bound (the latter when known).
    pub fn total_error(&self) -> f64 {
        self.quad_err + self.truncation_bound.unwrap_or(0.0)
    }
}

/// Parameters attached to a solution field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldParams {
    pub kernel: Kernel,
}

/// `u(x, y)` on a point set with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub params: FieldParams,
    pub config: QuadratureConfig,
    pub diagnostics: Vec<PointDiagnostics>,
}

impl SolutionField {
    pub fn all_converged(&self) -> bool {
        self.diagnostics.iter().all(|d| d.converged)
    }

    /// The first point whose quadrature did not converge, as an error.
    pub fn first_failure(&self) -> Option<Error> {
        self.diagnostics
            .iter()
            .zip(&self.values)
            .find(|(d, _)| !d.converged)
            .map(|(d, v)| Error::NonConvergence {
                estimate: *v,
                abs_err: d.quad_err,
                evaluations: d.evaluations,
            })
    }
}

fn check_kernel_dims(psi: &BoundarySpec, kernel: &Kernel) -> Result<()> {
    if psi.dim() != kernel.n() {
        return Err(Error::Boundary(format!(
            "boundary data lives in R^{} but the kernel in R^{}",
            psi.dim(),
            kernel.n()
        )));
    }
    if kernel.n() > 3 && !matches!(psi.data, BoundaryData::Radial(_)) {
        return Err(domain(
            "solve_dirichlet",
            "convolution supports n <= 3 (radial data at the origin only beyond that)",
        ));
    }
    Ok(())
}

/// `u(x, y) = ∫ ψ(t) P(x - t, y) dt` at one point.
///
/// Returns [`Error::NonConvergence`] with the best estimate when the budget
/// runs out.
pub fn convolve_at(
    psi: &BoundarySpec,
    pt: &Point,
    kernel: &Kernel,
    cfg: &QuadratureConfig,
) -> Result<(f64, PointDiagnostics)> {
    cfg.validate()?;
    check_kernel_dims(psi, kernel)?;
    if pt.dim() != kernel.n() {
        return Err(Error::Parameter {
            name: "x",
            value: pt.dim() as f64,
            reason: "point dimension differs from n",
        });
    }
    if !(pt.y > 0.0) || !pt.y.is_finite() {
        return Err(domain("solve_dirichlet", format!("height {} must be positive", pt.y)));
    }
    let profile = kernel.profile(pt.y)?;
    let eta = kernel.transformed_height(pt.y)?;
    let radius = kernel.truncation_radius(pt.y, cfg.truncation_mass)?;
    let breaks = psi.radial_breakpoints(&pt.x);
    let x = pt.x.clone();
    let est = radial_integral(
        &profile,
        kernel.n(),
        eta,
        kernel.params().beta,
        0.0,
        radius,
        &breaks,
        |rho| spherical_mean(psi, &x, rho, cfg),
        cfg,
    );
    let truncation_bound = if radius.is_finite() {
        psi.bound().map(|m| m * cfg.truncation_mass * kernel.constant_scale())
    } else {
        Some(0.0)
    };
    match est {
        Ok(e) => Ok((
            e.value,
            PointDiagnostics {
                quad_err: e.abs_err,
                truncation_bound,
                truncation_radius: radius,
                evaluations: e.evaluations,
                converged: true,
            },
        )),
        Err(e) => Err(e),
    }
}

/// Solves the Dirichlet problem at every point; points are evaluated in
/// parallel. Per-point quadrature failures are kept in the diagnostics with
/// the best available estimate; any other error aborts the solve.
pub fn solve_dirichlet(
    psi: &BoundarySpec,
    points: &[Point],
    kernel: &Kernel,
    cfg: &QuadratureConfig,
) -> Result<SolutionField> {
    cfg.validate()?;
    check_kernel_dims(psi, kernel)?;
    let results: Vec<Result<(f64, PointDiagnostics)>> = points
        .par_iter()
        .map(|pt| match convolve_at(psi, pt, kernel, cfg) {
            Err(Error::NonConvergence {
                estimate,
                abs_err,
                evaluations,
            }) => Ok((
                estimate,
                PointDiagnostics {
                    quad_err: abs_err,
                    truncation_bound: None,
                    truncation_radius: kernel
                        .truncation_radius(pt.y, cfg.truncation_mass)
                        .unwrap_or(f64::INFINITY),
                    evaluations,
                    converged: false,
                },
            )),
            other => other,
        })
        .collect();
    let mut values = Vec::with_capacity(points.len());
    let mut diagnostics = Vec::with_capacity(points.len());
    for r in results {
        let (v, d) = r?;
        values.push(v);
        diagnostics.push(d);
    }
    Ok(SolutionField {
        points: points.to_vec(),
        values,
        params: FieldParams { kernel: *kernel },
        config: *cfg,
        diagnostics,
    })
}

fn kernel_setup(kernel: &Kernel, y: f64) -> Result<(RadialProfile, f64)> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(domain("kernel integral", format!("height {y} must be positive")));
    }
    Ok((kernel.profile(y)?, kernel.transformed_height(y)?))
}

/// `∫_{R^n} P(x, y) dx` by radial quadrature over `[0, ∞)`.
pub fn radial_mass(kernel: &Kernel, y: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let (profile, eta) = kernel_setup(kernel, y)?;
    let est = radial_integral(
        &profile,
        kernel.n(),
        eta,
        kernel.params().beta,
        0.0,
        f64::INFINITY,
        &[],
        |_| Ok(1.0),
        cfg,
    )?;
    Ok(est.value)
}

/// `∫_{|x| >= δ} P(x, y) dx`.
pub fn tail_mass(kernel: &Kernel, y: f64, delta: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(domain("tail_mass", format!("radius {delta} must be positive")));
    }
    let (profile, eta) = kernel_setup(kernel, y)?;
    let est = radial_integral(
        &profile,
        kernel.n(),
        eta,
        kernel.params().beta,
        delta,
        f64::INFINITY,
        &[],
        |_| Ok(1.0),
        cfg,
    )?;
    Ok(est.value)
}

/// `∫_{R^n} φ(x) P(x, y) dx` for an integrable test function `φ`.
pub fn pair_against_test_function(
    phi: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    kernel: &Kernel,
    y: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let n = kernel.n();
    let psi = BoundarySpec::field(n, phi, None)?;
    let (profile, eta) = kernel_setup(kernel, y)?;
    let origin = vec![0.0; n];
    let est = radial_integral(
        &profile,
        n,
        eta,
        kernel.params().beta,
        0.0,
        f64::INFINITY,
        &[],
        |rho| spherical_mean(&psi, &origin, rho, cfg),
        cfg,
    )?;
    Ok(est.value)
}

/// `∫_{R^n} φ(|x|) P(x, y) dx` for a radial test function.
pub fn pair_against_radial(
    phi: impl Fn(f64) -> f64,
    kernel: &Kernel,
    y: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    cfg.validate()?;
    let (profile, eta) = kernel_setup(kernel, y)?;
    let est = radial_integral(
        &profile,
        kernel.n(),
        eta,
        kernel.params().beta,
        0.0,
        f64::INFINITY,
        &[],
        |rho| Ok(phi(rho)),
        cfg,
    )?;
    Ok(est.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::TransformedParams;

    fn poisson() -> Kernel {
        Kernel::transformed(TransformedParams::new(1, 0.0, 0.0).unwrap())
    }

    fn tight() -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-15,
            ..QuadratureConfig::default()
        }
    }

    #[test]
    fn split_segments_orders_and_merges() {
        let segs = split_segments(0.0, 3.0, -0.5, &[(2.0, 0.0), (1.0, -0.5), (1.0, -0.3), (5.0, 0.0)]);
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[0], Segment::with_exponents(0.0, 1.0, -0.5, -0.5));
        assert_eq!(segs[1], Segment::with_exponents(1.0, 2.0, -0.5, 0.0));
        assert_eq!(segs[2], Segment::with_exponents(2.0, 3.0, 0.0, 0.0));
    }

    #[test]
    fn radial_mass_of_poisson_kernel() {
        for &y in &[1.0, 1e-3, 1e3] {
            let m = radial_mass(&poisson(), y, &tight()).unwrap();
            assert!((m - 1.0).abs() < 1e-10, "{y}: {m}");
        }
    }

    #[test]
    fn tail_mass_matches_arctan() {
        for &y in &[1.0, 0.1, 0.01] {
            let t = tail_mass(&poisson(), y, 1.0, &tight()).unwrap();
            let exact = 1.0 - 2.0 / PI * (1.0 / y).atan();
            assert!((t - exact).abs() < 1e-10, "{y}: {t} vs {exact}");
        }
        assert!(tail_mass(&poisson(), 1.0, 0.0, &tight()).is_err());
    }

    #[test]
    fn constant_data_reproduces_constant() {
        let psi = BoundarySpec::constant(1, 3.0).unwrap();
        let (u, d) = convolve_at(&psi, &Point::on_line(0.7, 0.2), &poisson(), &tight()).unwrap();
        assert!((u - 3.0).abs() < 1e-9, "{u}");
        assert!(d.converged && d.truncation_bound.unwrap() <= 3.0 * 1e-10);
    }

    #[test]
    fn indicator_data_matches_arctan() {
        let psi = BoundarySpec::line(vec![Piece::new(0.0, f64::INFINITY, |_| 1.0)], Some(1.0)).unwrap();
        for &(x, y) in &[(0.0, 1.0), (0.5, 0.01), (-2.0, 0.3)] {
            let (u, _) = convolve_at(&psi, &Point::on_line(x, y), &poisson(), &tight()).unwrap();
            let exact = 0.5 + (x / y).atan() / PI;
            assert!((u - exact).abs() < 1e-9, "({x},{y}): {u} vs {exact}");
        }
    }

    #[test]
    fn singular_data_at_origin() {
        let psi = BoundarySpec::line(
            vec![Piece::new(0.0, f64::INFINITY, |t| -2.0 / t.sqrt()).with_exponents(-0.5, 0.0)],
            None,
        )
        .unwrap();
        let (u, _) = convolve_at(&psi, &Point::on_line(0.0, 1.0), &poisson(), &tight()).unwrap();
        assert!((u + 2f64.sqrt()).abs() < 1e-8, "{u}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let psi = BoundarySpec::constant(1, 1.0).unwrap();
        assert!(convolve_at(&psi, &Point::on_line(0.0, 0.0), &poisson(), &tight()).is_err());
        assert!(convolve_at(&psi, &Point::new(vec![0.0, 0.0], 1.0), &poisson(), &tight()).is_err());
        let overlap = BoundarySpec::line(
            vec![Piece::new(0.0, 2.0, |_| 1.0), Piece::new(1.0, 3.0, |_| 1.0)],
            None,
        );
        assert!(overlap.is_err());
        let over_bound = BoundarySpec::line(vec![Piece::new(0.0, 1.0, |t| 5.0 * t)], Some(1.0));
        assert!(over_bound.is_err());
        let bad_exp = BoundarySpec::line(
            vec![Piece::new(0.0, 1.0, |t| t).with_exponents(-1.5, 0.0)],
            None,
        );
        assert!(bad_exp.is_err());
    }

    #[test]
    fn pairing_with_odd_function_vanishes() {
        let v = pair_against_test_function(|x| x[0], &poisson(), 0.3, &tight()).unwrap();
        assert_eq!(v, 0.0);
        let z = pair_against_test_function(|_| 0.0, &poisson(), 0.3, &tight()).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn grid_samples_interpolate() {
        let g = GridSamples {
            origin: [0.0, 0.0],
            spacing: [1.0, 1.0],
            shape: [2, 2],
            values: vec![0.0, 1.0, 2.0, 3.0],
        };
        assert_eq!(g.eval(&[0.5, 0.5]), 1.5);
        assert_eq!(g.eval(&[1.0, 1.0]), 3.0);
        assert_eq!(g.eval(&[1.5, 0.5]), 0.0);
        assert!(BoundarySpec::samples(GridSamples {
            values: vec![1.0],
            ..g
        })
        .is_err());
    }
}

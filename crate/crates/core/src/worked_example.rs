//! Half-plane Laplace problem with boundary data `x₊^(-3/2)`.
//!
//! The density is not integrable at the origin, so the solution is obtained
//! by convolving the antiderivative `-2 x₊^(-1/2)` with the Poisson kernel
//! and differentiating in `x`:
//!
//! ```text
//! g(x, y) = -√2 y / (ρ √(ρ - x)) = -√2 √(ρ + x) / ρ,     ρ = √(x² + y²)
//! u(x, y) = ∂g/∂x = (2x - ρ) √(ρ + x) / (√2 ρ³)
//! ```
//!
//! `ρ + x` is formed as `y² / (ρ - x)` for `x < 0`, which keeps both
//! expressions accurate for `|x| ≫ y`.

use std::f64::consts::SQRT_2;

use crate::convolve::{convolve_at, BoundarySpec, Piece};
use crate::error::{domain, Result};
use crate::kernels::{Kernel, Point, TransformedParams};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExamplePoint {
    pub x: f64,
    pub y: f64,
}

impl ExamplePoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() || !x.is_finite() {
            return Err(domain("example", format!("point ({x}, {y}) needs finite x and y > 0")));
        }
        Ok(ExamplePoint { x, y })
    }
}

/// `(ρ, ρ + x)` without cancellation.
fn rho_and_sum(pt: &ExamplePoint) -> Result<(f64, f64)> {
    let pt = ExamplePoint::new(pt.x, pt.y)?;
    let rho = pt.x.hypot(pt.y);
    let s = if pt.x >= 0.0 {
        rho + pt.x
    } else {
        pt.y * (pt.y / (rho - pt.x))
    };
    Ok((rho, s))
}

/// Poisson convolution of `-2 t₊^(-1/2)`.
pub fn example_g(pt: ExamplePoint) -> Result<f64> {
    let (rho, s) = rho_and_sum(&pt)?;
    Ok(-SQRT_2 * s.sqrt() / rho)
}

/// Solution with boundary data `x₊^(-3/2)`.
pub fn example_u(pt: ExamplePoint) -> Result<f64> {
    let (rho, s) = rho_and_sum(&pt)?;
    Ok((2.0 * pt.x - rho) * s.sqrt() / (SQRT_2 * rho * rho * rho))
}

/// Boundary data `-2 t₊^(-1/2)` with the endpoint singularity declared.
pub fn antiderivative_data() -> BoundarySpec {
    BoundarySpec::line(
        vec![Piece::new(0.0, f64::INFINITY, |t| -2.0 / t.sqrt()).with_exponents(-0.5, 0.0)],
        None,
    )
    .expect("static boundary data is valid")
}

/// `g` by adaptive quadrature against the Poisson kernel.
pub fn example_g_quadrature(pt: ExamplePoint, cfg: &QuadratureConfig) -> Result<f64> {
    let pt = ExamplePoint::new(pt.x, pt.y)?;
    let kernel = Kernel::p0(TransformedParams::new(1, 0.0, 0.0)?)?;
    let (v, _) = convolve_at(&antiderivative_data(), &Point::on_line(pt.x, pt.y), &kernel, cfg)?;
    Ok(v)
}

/// Central difference of the closed-form `g` in `x`.
pub fn example_u_from_derivative(pt: ExamplePoint, h: f64) -> Result<f64> {
    let gp = example_g(ExamplePoint::new(pt.x + h, pt.y)?)?;
    let gm = example_g(ExamplePoint::new(pt.x - h, pt.y)?)?;
    Ok((gp - gm) / (2.0 * h))
}

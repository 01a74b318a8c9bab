//! Fundamental solutions of the half-space Dirichlet problem.
//!
//! In the original coordinates the equation is
//! `Δ_x u + y^m u_yy + α y^(m-1) u_y - λ² u = 0` with `m < 2`, `α < 1`.
//! The substitution `η = 2 y^((2-m)/2) / (2-m)` turns it into
//! `Δ_x u + u_ηη + (β/η) u_η - λ² u = 0` with `β = (2α - m)/(2 - m) < 1`,
//! whose fundamental solutions are
//!
//! ```text
//! P_0(x, y) = C_0 y^(1-β) / (|x|² + y²)^ν
//! P_λ(x, y) = C_λ y^(1-β) K_ν(λ ρ) / ρ^ν,      ρ = sqrt(|x|² + y²)
//! ν = (1 + n - β) / 2
//! C_0 = Γ(ν) / (π^(n/2) Γ((1-β)/2))
//! C_λ = λ^ν / (2^(ν-1) π^(n/2) Γ((1-β)/2))
//! ```
//!
//! Constants and kernel values are assembled in log space so that large
//! orders, large `λ ρ` and extreme heights neither overflow nor silently
//! flush to zero.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::specfun::{bessel_k_scaled, log_gamma, sphere_area};

/// Largest admissible `β`; the kernel family degenerates as `β -> 1`.
pub const BETA_MAX: f64 = 1.0 - 1e-6;

/// Parameters `(n, m, α, λ)` of the equation in original coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub n: usize,
    pub m: f64,
    pub alpha: f64,
    pub lambda: f64,
}

impl ProblemParams {
    pub fn new(n: usize, m: f64, alpha: f64, lambda: f64) -> Result<Self> {
        let p = ProblemParams { n, m, alpha, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Parameter {
                name: "n",
                value: self.n as f64,
                reason: "dimension must be at least 1",
            });
        }
        if !(self.m < 2.0) || !self.m.is_finite() {
            return Err(Error::Parameter {
                name: "m",
                value: self.m,
                reason: "degeneracy exponent must satisfy m < 2",
            });
        }
        if !(self.alpha < 1.0) || !self.alpha.is_finite() {
            return Err(Error::Parameter {
                name: "alpha",
                value: self.alpha,
                reason: "lower-order coefficient must satisfy alpha < 1",
            });
        }
        check_lambda(self.lambda)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::Parameter {
            name: "lambda",
            value: lambda,
            reason: "must be finite and non-negative",
        });
    }
    Ok(())
}

/// Parameters `(n, β, λ, ν)` of the equation in transformed coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedParams {
    pub n: usize,
    pub beta: f64,
    pub lambda: f64,
    pub nu: f64,
}

impl TransformedParams {
    pub fn new(n: usize, beta: f64, lambda: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Parameter {
                name: "n",
                value: n as f64,
                reason: "dimension must be at least 1",
            });
        }
        if !(beta < BETA_MAX) || !beta.is_finite() {
            return Err(Error::Parameter {
                name: "beta",
                value: beta,
                reason: "must satisfy beta < 1 - 1e-6",
            });
        }
        check_lambda(lambda)?;
        Ok(TransformedParams {
            n,
            beta,
            lambda,
            nu: (1.0 + n as f64 - beta) / 2.0,
        })
    }

    /// `(1 - β) / 2`, the order of the Bessel function in the mass formula.
    pub fn mu(&self) -> f64 {
        (1.0 - self.beta) / 2.0
    }
}

/// A point `(x, y)` of the closed half-space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Point {
    pub fn new(x: Vec<f64>, y: f64) -> Self {
        Point { x, y }
    }

    pub fn on_line(x: f64, y: f64) -> Self {
        Point { x: vec![x], y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Euclidean norm of the boundary coordinate.
    pub fn radius(&self) -> f64 {
        self.x.iter().fold(0.0f64, |acc, v| acc.hypot(*v))
    }
}

/// Maps original parameters to transformed ones.
pub fn to_transformed(p: &ProblemParams) -> Result<TransformedParams> {
    p.validate()?;
    let beta = (2.0 * p.alpha - p.m) / (2.0 - p.m);
    TransformedParams::new(p.n, beta, p.lambda)
}

/// `η = 2 y^((2-m)/2) / (2-m)`.
pub fn transform_y(m: f64, y: f64) -> Result<f64> {
    if !(m < 2.0) {
        return Err(Error::Parameter {
            name: "m",
            value: m,
            reason: "degeneracy exponent must satisfy m < 2",
        });
    }
    if !(y >= 0.0) || !y.is_finite() {
        return Err(domain("transform_y", format!("height {y} must be finite and >= 0")));
    }
    let k = (2.0 - m) / 2.0;
    Ok(y.powf(k) / k)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta < BETA_MAX) || !beta.is_finite() {
        return Err(Error::Parameter {
            name: "beta",
            value: beta,
            reason: "must satisfy beta < 1 - 1e-6",
        });
    }
    Ok(())
}

fn ln_c0(n: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let half_n = n as f64 / 2.0;
    let mu = (1.0 - beta) / 2.0;
    Ok(log_gamma(half_n + mu)? - half_n * PI.ln() - log_gamma(mu)?)
}

/// Normalisation constant of `P_0`.
pub fn c0_constant(n: usize, beta: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Parameter {
            name: "n",
            value: 0.0,
            reason: "dimension must be at least 1",
        });
    }
    Ok(ln_c0(n, beta)?.exp())
}

fn ln_clambda(tp: &TransformedParams) -> Result<f64> {
    if !(tp.lambda > 0.0) {
        return Err(Error::Parameter {
            name: "lambda",
            value: tp.lambda,
            reason: "must be positive for the Bessel kernel",
        });
    }
    check_beta(tp.beta)?;
    let nu = tp.nu;
    Ok(nu * tp.lambda.ln()
        - (nu - 1.0) * 2f64.ln()
        - tp.n as f64 / 2.0 * PI.ln()
        - log_gamma(tp.mu())?)
}

/// Normalisation constant of `P_λ`.
pub fn clambda_constant(tp: &TransformedParams) -> Result<f64> {
    Ok(ln_clambda(tp)?.exp())
}

/// Radial profile `r -> P(r, y)` of a kernel at a fixed height, with all
/// y-dependent factors folded into constants.
#[derive(Debug, Clone, Copy)]
pub enum RadialProfile {
    /// `y = 0`: the kernel vanishes off the origin.
    Boundary,
    P0 {
        ln_prefactor: f64,
        prefactor: f64,
        y: f64,
        nu: f64,
    },
    PLambda {
        ln_prefactor: f64,
        y: f64,
        nu: f64,
        lambda: f64,
    },
}

impl RadialProfile {
    fn new(tp: &TransformedParams, y: f64, scale: f64) -> Result<Self> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(domain("kernel", format!("height {y} must be finite and >= 0")));
        }
        if y == 0.0 {
            return Ok(RadialProfile::Boundary);
        }
        let ln_y_part = (1.0 - tp.beta) * y.ln() + scale.ln();
        if tp.lambda == 0.0 {
            let ln_prefactor = ln_c0(tp.n, tp.beta)? + ln_y_part;
            Ok(RadialProfile::P0 {
                ln_prefactor,
                prefactor: ln_prefactor.exp(),
                y,
                nu: tp.nu,
            })
        } else {
            Ok(RadialProfile::PLambda {
                ln_prefactor: ln_clambda(tp)? + ln_y_part,
                y,
                nu: tp.nu,
                lambda: tp.lambda,
            })
        }
    }

    /// Kernel value at distance `r >= 0` from the origin.
    pub fn value(&self, r: f64) -> Result<f64> {
        match *self {
            RadialProfile::Boundary => {
                if r > 0.0 {
                    Ok(0.0)
                } else {
                    Err(Error::Singularity)
                }
            }
            RadialProfile::P0 {
                ln_prefactor,
                prefactor,
                y,
                nu,
            } => {
                let s = r * r + y * y;
                if s.is_normal() && prefactor.is_normal() && s < 1e150 {
                    let v = prefactor * s.powf(-nu);
                    if v.is_normal() {
                        return Ok(v);
                    }
                }
                Ok((ln_prefactor - 2.0 * nu * r.hypot(y).ln()).exp())
            }
            RadialProfile::PLambda {
                ln_prefactor,
                y,
                nu,
                lambda,
            } => {
                let rho = r.hypot(y);
                let z = lambda * rho;
                let ks = bessel_k_scaled(nu, z)?;
                Ok((ln_prefactor - nu * rho.ln() - z + ks.ln()).exp())
            }
        }
    }
}

fn check_point(pt: &Point, n: usize) -> Result<()> {
    if pt.dim() != n {
        return Err(Error::Parameter {
            name: "x",
            value: pt.dim() as f64,
            reason: "point dimension differs from n",
        });
    }
    if pt.x.iter().any(|v| !v.is_finite()) {
        return Err(domain("kernel", "non-finite boundary coordinate"));
    }
    Ok(())
}

/// `P_0(x, y)`; zero on the boundary away from the origin.
pub fn kernel_p0(pt: &Point, tp: &TransformedParams) -> Result<f64> {
    if tp.lambda != 0.0 {
        return Err(Error::Parameter {
            name: "lambda",
            value: tp.lambda,
            reason: "P0 requires lambda = 0",
        });
    }
    check_point(pt, tp.n)?;
    RadialProfile::new(tp, pt.y, 1.0)?.value(pt.radius())
}

/// `P_λ(x, y)` for `λ > 0`; zero on the boundary away from the origin.
pub fn kernel_plambda(pt: &Point, tp: &TransformedParams) -> Result<f64> {
    if !(tp.lambda > 0.0) {
        return Err(Error::Parameter {
            name: "lambda",
            value: tp.lambda,
            reason: "P_lambda requires lambda > 0",
        });
    }
    check_point(pt, tp.n)?;
    RadialProfile::new(tp, pt.y, 1.0)?.value(pt.radius())
}

/// Closed-form mass `C_λ (2π/λ)^(n/2) y^((1-β)/2) K_((1-β)/2)(λ y)` of `P_λ`
/// over the hyperplane at height `y`.
pub fn total_mass_plambda(y: f64, tp: &TransformedParams) -> Result<f64> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(domain("total_mass_plambda", format!("height {y} must be positive")));
    }
    let mu = tp.mu();
    let z = tp.lambda * y;
    let ln_mass = ln_clambda(tp)? + tp.n as f64 / 2.0 * (2.0 * PI / tp.lambda).ln() + mu * y.ln()
        - z
        + bessel_k_scaled(mu, z)?.ln();
    Ok(ln_mass.exp())
}

/// Fundamental solution in original coordinates, defined by substituting
/// `η = transform_y(m, y)` into `P_0` or `P_λ`.
pub fn kernel_q(pt: &Point, p: &ProblemParams) -> Result<f64> {
    let tp = to_transformed(p)?;
    check_point(pt, tp.n)?;
    let eta = transform_y(p.m, pt.y)?;
    RadialProfile::new(&tp, eta, 1.0)?.value(pt.radius())
}

/// Which fundamental solution a [`Kernel`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelForm {
    P0,
    PLambda,
    Q,
}

impl KernelForm {
    pub fn name(&self) -> &'static str {
        match self {
            KernelForm::P0 => "p0",
            KernelForm::PLambda => "plambda",
            KernelForm::Q => "q",
        }
    }
}

/// A kernel selector with its parameters, used by the quadrature and
/// verification layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    form: KernelForm,
    params: TransformedParams,
    original: Option<ProblemParams>,
    constant_scale: f64,
}

impl Kernel {
    pub fn p0(tp: TransformedParams) -> Result<Self> {
        if tp.lambda != 0.0 {
            return Err(Error::Parameter {
                name: "lambda",
                value: tp.lambda,
                reason: "P0 requires lambda = 0",
            });
        }
        Ok(Kernel {
            form: KernelForm::P0,
            params: tp,
            original: None,
            constant_scale: 1.0,
        })
    }

    pub fn plambda(tp: TransformedParams) -> Result<Self> {
        if !(tp.lambda > 0.0) {
            return Err(Error::Parameter {
                name: "lambda",
                value: tp.lambda,
                reason: "P_lambda requires lambda > 0",
            });
        }
        Ok(Kernel {
            form: KernelForm::PLambda,
            params: tp,
            original: None,
            constant_scale: 1.0,
        })
    }

    /// `P_0` when `λ = 0`, `P_λ` otherwise.
    pub fn transformed(tp: TransformedParams) -> Self {
        let form = if tp.lambda == 0.0 {
            KernelForm::P0
        } else {
            KernelForm::PLambda
        };
        Kernel {
            form,
            params: tp,
            original: None,
            constant_scale: 1.0,
        }
    }

    pub fn q(p: ProblemParams) -> Result<Self> {
        Ok(Kernel {
            form: KernelForm::Q,
            params: to_transformed(&p)?,
            original: Some(p),
            constant_scale: 1.0,
        })
    }

    /// Multiplies the normalisation constant; a test hook for sensitivity
    /// checks of the verification suite.
    pub fn with_constant_scale(mut self, scale: f64) -> Self {
        self.constant_scale = scale;
        self
    }

    pub fn constant_scale(&self) -> f64 {
        self.constant_scale
    }

    pub fn form(&self) -> KernelForm {
        self.form
    }

    pub fn params(&self) -> &TransformedParams {
        &self.params
    }

    pub fn original(&self) -> Option<&ProblemParams> {
        self.original.as_ref()
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    /// Height in transformed coordinates for a height in the kernel's own
    /// coordinates.
    pub fn transformed_height(&self, y: f64) -> Result<f64> {
        match &self.original {
            Some(p) => transform_y(p.m, y),
            None => {
                if !(y >= 0.0) || !y.is_finite() {
                    return Err(domain("kernel", format!("height {y} must be finite and >= 0")));
                }
                Ok(y)
            }
        }
    }

    /// Radial profile at height `y` (in the kernel's own coordinates).
    pub fn profile(&self, y: f64) -> Result<RadialProfile> {
        let eta = self.transformed_height(y)?;
        RadialProfile::new(&self.params, eta, self.constant_scale)
    }

    pub fn eval(&self, pt: &Point) -> Result<f64> {
        check_point(pt, self.params.n)?;
        self.profile(pt.y)?.value(pt.radius())
    }

    pub fn radial(&self, r: f64, y: f64) -> Result<f64> {
        self.profile(y)?.value(r)
    }

    /// Exact hyperplane mass at height `y`: 1 for `λ = 0`, the Bessel closed
    /// form otherwise.
    pub fn closed_form_mass(&self, y: f64) -> Result<f64> {
        let eta = self.transformed_height(y)?;
        if !(eta > 0.0) {
            return Err(domain("closed_form_mass", "height must be positive"));
        }
        let base = if self.params.lambda == 0.0 {
            1.0
        } else {
            total_mass_plambda(eta, &self.params)?
        };
        Ok(base * self.constant_scale)
    }

    /// Radius `R` such that the kernel mass outside the ball of radius `R`
    /// at height `y` is at most `eps`. Uses the algebraic `P_0` tail bound
    /// (valid for `P_λ` too, since `P_λ <= P_0` pointwise) and, for `λ > 0`,
    /// the exponential Bessel bound; the smaller radius is returned.
    /// `f64::INFINITY` means no finite truncation is representable.
    pub fn truncation_radius(&self, y: f64, eps: f64) -> Result<f64> {
        let eta = self.transformed_height(y)?;
        if !(eta > 0.0) {
            return Err(domain("truncation_radius", "height must be positive"));
        }
        let tp = &self.params;
        let n = tp.n;
        let one_minus_beta = 1.0 - tp.beta;
        let ln_sigma = sphere_area(n)?.ln();
        let ln_scale = self.constant_scale.ln().max(0.0);
        let ln_algebraic = eta.ln()
            + (ln_sigma + ln_c0(n, tp.beta)? + ln_scale - one_minus_beta.ln() - eps.ln())
                / one_minus_beta;
        let algebraic = ln_algebraic.exp();
        if tp.lambda == 0.0 {
            return Ok(algebraic);
        }

        let lambda = tp.lambda;
        let a = (n as f64 + tp.beta - 4.0) / 2.0;
        let ln_front = ln_sigma + ln_clambda(tp)? + ln_scale + one_minus_beta * eta.ln();
        let ln_bound = |r: f64| -> Result<Option<f64>> {
            let factor = if a <= 0.0 {
                1.0
            } else if lambda * r >= 2.0 * a {
                2.0
            } else {
                return Ok(None);
            };
            let z = lambda * r;
            let ln_k = bessel_k_scaled(tp.nu, z)?.ln() - z;
            Ok(Some(
                ln_front + ln_k + (0.5 + a) * r.ln() + (factor / lambda).ln(),
            ))
        };
        let mut r = eta.max(1.0 / lambda);
        let target = eps.ln();
        while r < algebraic {
            if let Some(lb) = ln_bound(r)? {
                if lb <= target {
                    return Ok(r);
                }
            }
            r *= 1.25;
        }
        Ok(algebraic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn transform_examples() {
        let tp = to_transformed(&ProblemParams::new(1, 0.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((tp.beta, tp.nu), (0.0, 1.0));
        let tp = to_transformed(&ProblemParams::new(1, 1.0, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!((tp.beta, tp.nu), (-1.0, 1.5));
        let tp = to_transformed(&ProblemParams::new(2, 1.0, 0.5, 0.0).unwrap()).unwrap();
        assert_eq!((tp.beta, tp.nu), (0.0, 1.5));
    }

    #[test]
    fn parameter_validation() {
        assert!(ProblemParams::new(1, 2.0, 0.0, 0.0).is_err());
        assert!(ProblemParams::new(1, 0.0, 1.0, 0.0).is_err());
        assert!(ProblemParams::new(1, 0.0, 0.0, -1.0).is_err());
        assert!(ProblemParams::new(0, 0.0, 0.0, 0.0).is_err());
        assert!(TransformedParams::new(1, 1.0 - 1e-7, 0.0).is_err());
        assert!(TransformedParams::new(1, 0.999, 0.0).is_ok());
        // m close to 2 with alpha close to 1 stays below the beta guard
        let p = ProblemParams::new(1, 1.999, 0.9995, 0.0).unwrap();
        assert!(to_transformed(&p).unwrap().beta < 1.0);
    }

    #[test]
    fn transform_y_examples() {
        assert_eq!(transform_y(0.0, 1.0).unwrap(), 1.0);
        assert_eq!(transform_y(1.0, 1.0).unwrap(), 2.0);
        assert_eq!(transform_y(1.0, 4.0).unwrap(), 4.0);
        assert_eq!(transform_y(1.0, 0.0).unwrap(), 0.0);
        assert!(transform_y(1.0, -1.0).is_err());
        assert!(transform_y(1.0, 2.0).unwrap() < transform_y(1.0, 2.1).unwrap());
    }

    #[test]
    fn constants() {
        assert!(rel(c0_constant(1, 0.0).unwrap(), 1.0 / PI) < 1e-15);
        assert!(rel(c0_constant(2, 0.0).unwrap(), 0.5 / PI) < 1e-15);
        assert!(rel(c0_constant(3, 0.0).unwrap(), 1.0 / (PI * PI)) < 1e-15);
        assert!(c0_constant(1, 1.0).is_err());

        let tp = TransformedParams::new(1, 0.0, 1.0).unwrap();
        assert!(rel(clambda_constant(&tp).unwrap(), 1.0 / PI) < 1e-15);
        let tp = TransformedParams::new(1, 0.0, 2.0).unwrap();
        assert!(rel(clambda_constant(&tp).unwrap(), 2.0 / PI) < 1e-15);
        let tp = TransformedParams::new(3, 0.0, 1.0).unwrap();
        assert!(rel(clambda_constant(&tp).unwrap(), 0.5 / (PI * PI)) < 1e-15);
        let tp = TransformedParams::new(3, 0.0, 0.0).unwrap();
        assert!(clambda_constant(&tp).is_err());
    }

    #[test]
    fn p0_values() {
        let tp = TransformedParams::new(1, 0.0, 0.0).unwrap();
        assert!(rel(kernel_p0(&Point::on_line(0.0, 1.0), &tp).unwrap(), 1.0 / PI) < 1e-15);
        assert!(rel(kernel_p0(&Point::on_line(1.0, 1.0), &tp).unwrap(), 0.5 / PI) < 1e-15);
        let tp2 = TransformedParams::new(2, 0.5, 0.0).unwrap();
        assert_eq!(kernel_p0(&Point::new(vec![3.0, 0.0], 0.0), &tp2).unwrap(), 0.0);
        assert_eq!(
            kernel_p0(&Point::new(vec![0.0, 0.0], 0.0), &tp2),
            Err(Error::Singularity)
        );
        assert!(kernel_p0(&Point::on_line(0.0, 1.0), &tp2).is_err());
        let tpl = TransformedParams::new(1, 0.0, 1.0).unwrap();
        assert!(kernel_p0(&Point::on_line(0.0, 1.0), &tpl).is_err());
    }

    #[test]
    fn p0_far_field_does_not_flush() {
        let tp = TransformedParams::new(3, -1.0, 0.0).unwrap();
        let v = kernel_p0(&Point::new(vec![1e200, 0.0, 0.0], 1.0), &tp).unwrap();
        assert!(v == 0.0 || v.is_finite());
        let v = kernel_p0(&Point::new(vec![1e100, 0.0, 0.0], 1e-100), &tp).unwrap();
        // C y^2 / r^5 = C 1e-200 / 1e500 underflows legitimately
        assert_eq!(v, 0.0);
        let v = kernel_p0(&Point::new(vec![1e60, 0.0, 0.0], 1.0), &tp).unwrap();
        assert!(rel(v, c0_constant(3, -1.0).unwrap() * 1e-300) < 1e-12);
    }

    #[test]
    fn plambda_values() {
        let tp = TransformedParams::new(1, 0.0, 1.0).unwrap();
        // K_1(1) = 0.6019072301972346
        let v = kernel_plambda(&Point::on_line(0.0, 1.0), &tp).unwrap();
        assert!(rel(v, 0.601_907_230_197_234_6 / PI) < 1e-12);
        assert_eq!(kernel_plambda(&Point::on_line(2.0, 0.0), &tp).unwrap(), 0.0);
        assert_eq!(kernel_plambda(&Point::on_line(0.0, 0.0), &tp), Err(Error::Singularity));
        // large lambda * rho still representable through the scaled Bessel function
        let big = TransformedParams::new(2, 0.0, 300.0).unwrap();
        let v = kernel_plambda(&Point::new(vec![2.0, 0.0], 1.0), &big).unwrap();
        assert!(v > 0.0 && v.is_finite());
    }

    #[test]
    fn plambda_small_lambda_approaches_p0() {
        let tp0 = TransformedParams::new(1, 0.0, 0.0).unwrap();
        let tpl = TransformedParams::new(1, 0.0, 1e-3).unwrap();
        let pt = Point::on_line(4.0, 3.0);
        let a = kernel_plambda(&pt, &tpl).unwrap();
        let b = kernel_p0(&pt, &tp0).unwrap();
        assert!(rel(a, b) < 1e-4);
    }

    #[test]
    fn plambda_to_p0_ratio_near_boundary() {
        let tp0 = TransformedParams::new(1, 0.0, 0.0).unwrap();
        let tpl = TransformedParams::new(1, 0.0, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for &y in &[1e-1, 1e-2, 1e-3, 1e-4] {
            let pt = Point::on_line(0.0, y);
            let ratio = kernel_plambda(&pt, &tpl).unwrap() / kernel_p0(&pt, &tp0).unwrap();
            let gap = (ratio - 1.0).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn total_mass_examples() {
        let tp = TransformedParams::new(1, 0.0, 1.0).unwrap();
        assert!(rel(total_mass_plambda(1.0, &tp).unwrap(), (-1.0f64).exp()) < 1e-14);
        let tp = TransformedParams::new(1, 0.0, 2.0).unwrap();
        assert!(rel(total_mass_plambda(1e-3, &tp).unwrap(), (-0.002f64).exp()) < 1e-14);
        for &(n, beta, lambda) in &[(1, -1.0, 0.5), (2, 0.5, 3.0), (3, 0.9, 1.0)] {
            let tp = TransformedParams::new(n, beta, lambda).unwrap();
            // 1 - mass ~ (lambda y)^(1-beta), slow for beta near 1
            let mut last = 0.0;
            for &y in &[1.0, 1e-3, 1e-6, 1e-12] {
                let m = total_mass_plambda(y, &tp).unwrap();
                assert!(m > last && m < 1.0, "{n} {beta} {lambda} {y}: {m}");
                last = m;
            }
            assert!(1.0 - last < 0.1, "{last}");
        }
        assert!(total_mass_plambda(0.0, &tp).is_err());
    }

    #[test]
    fn q_examples() {
        let p = ProblemParams::new(1, 0.0, 0.0, 0.0).unwrap();
        let tp = to_transformed(&p).unwrap();
        for &(x, y) in &[(0.0, 1.0), (0.3, 0.2), (-2.0, 5.0)] {
            let pt = Point::on_line(x, y);
            assert_eq!(kernel_q(&pt, &p).unwrap(), kernel_p0(&pt, &tp).unwrap());
        }
        // n=1, m=1, alpha=0: beta=-1, eta=2, nu=3/2, C=Gamma(3/2)/(sqrt(pi) Gamma(1)) = 1/2,
        // P0(0, 2) = (1/2) * 2^2 / (2^2)^(3/2) = 1/4
        let p = ProblemParams::new(1, 1.0, 0.0, 0.0).unwrap();
        assert!(rel(kernel_q(&Point::on_line(0.0, 1.0), &p).unwrap(), 0.25) < 1e-15);
        assert_eq!(kernel_q(&Point::on_line(0.0, 0.0), &p), Err(Error::Singularity));
    }

    #[test]
    fn kernel_selector() {
        let tp = TransformedParams::new(2, 0.5, 0.0).unwrap();
        assert!(Kernel::plambda(tp).is_err());
        let k = Kernel::p0(tp).unwrap();
        assert_eq!(k.form(), KernelForm::P0);
        let pt = Point::new(vec![0.3, -0.4], 0.7);
        assert_eq!(k.eval(&pt).unwrap(), kernel_p0(&pt, &tp).unwrap());
        let scaled = k.with_constant_scale(1.01);
        assert!(rel(scaled.eval(&pt).unwrap(), 1.01 * k.eval(&pt).unwrap()) < 1e-14);
        assert!(rel(scaled.closed_form_mass(0.5).unwrap(), 1.01) < 1e-15);
    }

    #[test]
    fn truncation_radius_bounds_the_tail() {
        // Poisson kernel: tail beyond R is (2/pi) atan(y/R) ~ 2y/(pi R)
        let k = Kernel::transformed(TransformedParams::new(1, 0.0, 0.0).unwrap());
        let r = k.truncation_radius(1.0, 1e-10).unwrap();
        let tail = 2.0 / PI * (1.0 / r).atan();
        assert!(tail <= 1e-10 * (1.0 + 1e-12) && tail > 1e-11, "{r} {tail}");
        let kl = Kernel::transformed(TransformedParams::new(1, 0.0, 1.0).unwrap());
        let rl = kl.truncation_radius(1.0, 1e-10).unwrap();
        assert!(rl < 40.0, "{rl}");
        let heavy = Kernel::transformed(TransformedParams::new(3, 0.9, 0.0).unwrap());
        assert!(heavy.truncation_radius(1.0, 1e-10).unwrap() > 1e90);
    }
}

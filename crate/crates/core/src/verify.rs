//! Independent numerical checks: finite-difference PDE residuals, the
//! approximation-to-identity suite and a finite-difference boundary-value
//! oracle on a truncated box.

use rayon::prelude::*;

use crate::convolve::{
    pair_against_radial, radial_mass, solve_dirichlet, tail_mass, BoundarySpec,
};
use crate::error::{domain, Error, Result};
use crate::kernels::{Kernel, KernelForm, Point, ProblemParams, TransformedParams};
use crate::quadrature::QuadratureConfig;

/// Which equation a residual is measured against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation {
    /// `Δ_x u + u_yy + (β/y) u_y - λ² u = 0`.
    Transformed(TransformedParams),
    /// `Δ_x u + y^m u_yy + α y^(m-1) u_y - λ² u = 0`.
    Original(ProblemParams),
}

impl Equation {
    pub fn name(&self) -> &'static str {
        match self {
            Equation::Transformed(_) => "transformed",
            Equation::Original(_) => "original",
        }
    }

    /// The equation a kernel is supposed to satisfy.
    pub fn for_kernel(kernel: &Kernel) -> Self {
        match (kernel.form(), kernel.original()) {
            (KernelForm::Q, Some(p)) => Equation::Original(*p),
            _ => Equation::Transformed(*kernel.params()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub point: Point,
    pub h: f64,
    pub residual: f64,
    pub equation: Equation,
}

/// Second-order central-difference residual of `equation` applied to `u`.
pub fn pde_residual<F>(u: F, pt: &Point, h: f64, equation: &Equation) -> Result<ResidualReport>
where
    F: Fn(&Point) -> Result<f64>,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(domain("pde_residual", format!("step {h} must be positive")));
    }
    if !(pt.y > 2.0 * h) {
        return Err(Error::Stencil { y: pt.y, h });
    }
    let u0 = u(pt)?;
    let h2 = h * h;
    let mut lap_x = 0.0;
    let mut q = pt.clone();
    for i in 0..pt.dim() {
        q.x[i] = pt.x[i] + h;
        let up = u(&q)?;
        q.x[i] = pt.x[i] - h;
        let um = u(&q)?;
        q.x[i] = pt.x[i];
        lap_x += (up - 2.0 * u0 + um) / h2;
    }
    q.y = pt.y + h;
    let up = u(&q)?;
    q.y = pt.y - h;
    let um = u(&q)?;
    let u_yy = (up - 2.0 * u0 + um) / h2;
    let u_y = (up - um) / (2.0 * h);
    let y = pt.y;
    let residual = match equation {
        Equation::Transformed(tp) => {
            lap_x + u_yy + tp.beta / y * u_y - tp.lambda * tp.lambda * u0
        }
        Equation::Original(p) => {
            lap_x + y.powf(p.m) * u_yy + p.alpha * y.powf(p.m - 1.0) * u_y
                - p.lambda * p.lambda * u0
        }
    };
    if !residual.is_finite() {
        return Err(domain("pde_residual", "residual is not finite"));
    }
    Ok(ResidualReport {
        point: pt.clone(),
        h,
        residual,
        equation: *equation,
    })
}

/// Residuals at `h` and `h/2` and the observed order `log2(r(h)/r(h/2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderCheck {
    pub residual_h: f64,
    pub residual_half: f64,
    pub order: f64,
}

pub fn residual_order<F>(u: F, pt: &Point, h: f64, equation: &Equation) -> Result<OrderCheck>
where
    F: Fn(&Point) -> Result<f64>,
{
    let a = pde_residual(&u, pt, h, equation)?.residual;
    let b = pde_residual(&u, pt, 0.5 * h, equation)?.residual;
    Ok(OrderCheck {
        residual_h: a,
        residual_half: b,
        order: (a / b).abs().log2(),
    })
}

/// Per-height entries of the identity suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityRow {
    pub y: f64,
    /// Smallest kernel value over the sampled radii.
    pub min_value: f64,
    pub mass: f64,
    pub closed_form_mass: f64,
    /// Mass outside the ball of radius `delta`.
    pub tail: f64,
    /// Largest kernel value over `|x| >= delta`.
    pub sup_outside: f64,
    /// `∫ exp(-|x|²) P(x, y) dx`.
    pub pairing: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub kernel: Kernel,
    pub delta: f64,
    pub rows: Vec<IdentityRow>,
    pub mass_tol: f64,
}

fn strictly_decreasing(v: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = v.collect();
    v.windows(2).all(|w| w[1] < w[0])
}

impl IdentityReport {
    pub fn positive(&self) -> bool {
        self.rows.iter().all(|r| r.min_value > 0.0)
    }

    pub fn mass_ok(&self) -> bool {
        self.rows
            .iter()
            .all(|r| (r.mass - r.closed_form_mass).abs() <= self.mass_tol * r.closed_form_mass.max(1.0))
    }

    /// Mass increases towards 1 as `y` decreases (constant 1 for `P_0`).
    pub fn mass_tends_to_one(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| (1.0 - w[1].closed_form_mass).abs() <= (1.0 - w[0].closed_form_mass).abs())
    }

    pub fn tail_decreasing(&self) -> bool {
        strictly_decreasing(self.rows.iter().map(|r| r.tail))
    }

    pub fn sup_decreasing(&self) -> bool {
        strictly_decreasing(self.rows.iter().map(|r| r.sup_outside))
    }

    pub fn pairing_converging(&self) -> bool {
        strictly_decreasing(self.rows.iter().map(|r| (r.pairing - 1.0).abs()))
    }

    pub fn all_pass(&self) -> bool {
        self.positive()
            && self.mass_ok()
            && self.mass_tends_to_one()
            && self.tail_decreasing()
            && self.sup_decreasing()
            && self.pairing_converging()
    }
}

/// Geometric radii in `[lo, hi]`.
fn geometric(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let r = (hi / lo).ln();
    (0..count).map(move |k| lo * (r * k as f64 / (count - 1) as f64).exp())
}

/// Approximation-to-identity checks along a decreasing list of heights.
pub fn identity_suite(
    kernel: &Kernel,
    y_list: &[f64],
    delta: f64,
    cfg: &QuadratureConfig,
) -> Result<IdentityReport> {
    cfg.validate()?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(domain("identity_suite", format!("delta {delta} must be positive")));
    }
    if y_list.iter().any(|y| !(*y > 0.0) || !y.is_finite()) {
        return Err(domain("identity_suite", "heights must be positive"));
    }
    if y_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(domain("identity_suite", "heights must be strictly decreasing"));
    }
    let rows = y_list
        .par_iter()
        .map(|&y| -> Result<IdentityRow> {
            let eta = kernel.transformed_height(y)?;
            let far = kernel.truncation_radius(y, 1e-10)?.max(10.0 * delta.max(eta));
            let mut min_value = kernel.radial(0.0, y)?;
            for r in geometric(1e-3 * eta.min(delta), far, 96) {
                min_value = min_value.min(kernel.radial(r, y)?);
            }
            let mut sup_outside = 0.0f64;
            for r in geometric(delta, far, 96) {
                sup_outside = sup_outside.max(kernel.radial(r, y)?);
            }
            Ok(IdentityRow {
                y,
                min_value,
                mass: radial_mass(kernel, y, cfg)?,
                closed_form_mass: kernel.closed_form_mass(y)?,
                tail: tail_mass(kernel, y, delta, cfg)?,
                sup_outside,
                pairing: pair_against_radial(|r| (-r * r).exp(), kernel, y, cfg)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdentityReport {
        kernel: *kernel,
        delta,
        rows,
        mass_tol: (10.0 * cfg.rel_tol).max(1e-12),
    })
}

/// Truncated box `[-L, L]^n x [0, H]` with uniform step `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdBox {
    pub half_width: f64,
    pub height: f64,
    pub step: f64,
    pub params: TransformedParams,
}

impl FdBox {
    pub fn new(half_width: f64, height: f64, step: f64, params: TransformedParams) -> Result<Self> {
        let b = FdBox {
            half_width,
            height,
            step,
            params,
        };
        b.cells()?;
        Ok(b)
    }

    /// Cell counts `(2L/h, H/h)`.
    fn cells(&self) -> Result<(usize, usize)> {
        let h = self.step;
        if !(h > 0.0 && self.half_width > 0.0 && self.height > 0.0) {
            return Err(Error::Geometry("L, H and h must be positive".into()));
        }
        if self.params.n > 2 {
            return Err(Error::Geometry(format!(
                "the finite-difference oracle supports n <= 2, got {}",
                self.params.n
            )));
        }
        let count = |len: f64, what: &str| -> Result<usize> {
            let k = (len / h).round();
            if k < 2.0 || ((len / h) - k).abs() > 1e-9 * k {
                return Err(Error::Geometry(format!("h = {h} does not divide {what} = {len}")));
            }
            Ok(k as usize)
        };
        Ok((count(2.0 * self.half_width, "2L")?, count(self.height, "H")?))
    }
}

/// Grid solution including boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub n: usize,
    /// Node coordinates along each x axis.
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Index `((j * nx + i1) * nx + i2)` for `n = 2`, `(j * nx + i)` for `n = 1`.
    pub values: Vec<f64>,
    /// Discrete residual (max norm) relative to the operator scale.
    pub relative_residual: f64,
}

impl FdGrid {
    pub fn at(&self, idx: &[usize], j: usize) -> f64 {
        let nx = self.xs.len();
        match self.n {
            1 => self.values[j * nx + idx[0]],
            _ => self.values[(j * nx + idx[0]) * nx + idx[1]],
        }
    }

    /// Interior nodes with their values.
    pub fn interior(&self) -> Vec<(Point, f64)> {
        let nx = self.xs.len();
        let mut out = Vec::new();
        for j in 1..self.ys.len() - 1 {
            for i in 1..nx - 1 {
                if self.n == 1 {
                    out.push((Point::on_line(self.xs[i], self.ys[j]), self.at(&[i], j)));
                } else {
                    for k in 1..nx - 1 {
                        out.push((
                            Point::new(vec![self.xs[i], self.xs[k]], self.ys[j]),
                            self.at(&[i, k], j),
                        ));
                    }
                }
            }
        }
        out
    }
}

/// Row coefficients of the flux-fitted scheme.
///
/// The equation is used in divergence form
/// `y^β Δ_x u + (y^β u_y)_y - λ² y^β u = 0`. Writing `s = y^(1-β)/(1-β)`
/// the flux `y^β u_y = u_s` is approximated by a difference in `s`, and the
/// other terms are weighted with `∫ y^β` over the control volume.
struct RowCoeffs {
    /// x coupling, `m_j / h²`.
    cx: f64,
    north: f64,
    south: f64,
    /// Reaction term, `λ² m_j`.
    react: f64,
}

fn row_coeffs(beta: f64, lambda: f64, y: f64, h: f64) -> RowCoeffs {
    let s = |t: f64| t.powf(1.0 - beta) / (1.0 - beta);
    let (a, b) = (y - 0.5 * h, y + 0.5 * h);
    let m = if (beta + 1.0).abs() < 1e-12 {
        (b / a).ln()
    } else {
        (b.powf(1.0 + beta) - a.powf(1.0 + beta)) / (1.0 + beta)
    };
    RowCoeffs {
        cx: m / (h * h),
        north: 1.0 / (s(y + h) - s(y)),
        south: 1.0 / (s(y) - s(y - h)),
        react: lambda * lambda * m,
    }
}

/// Sine-transform matrix `S[k][i] = sin(π (k+1)(i+1) / N)`.
fn sine_matrix(m: usize) -> Vec<f64> {
    let nn = (m + 1) as f64;
    let mut s = vec![0.0; m * m];
    for k in 0..m {
        for i in 0..m {
            let p = ((k + 1) * (i + 1)) % (2 * (m + 1));
            s[k * m + i] = (std::f64::consts::PI * p as f64 / nn).sin();
        }
    }
    s
}

/// Solves the discretized equation on `bx` with Dirichlet data from
/// `boundary(x, y)` on every side of the box (bottom row `y = 0` included).
pub fn fd_oracle_solve<B>(bx: &FdBox, boundary: B) -> Result<FdGrid>
where
    B: Fn(&[f64], f64) -> f64,
{
    let (ni, nj) = bx.cells()?;
    let h = bx.step;
    let n = bx.params.n;
    let xs: Vec<f64> = (0..=ni).map(|i| -bx.half_width + i as f64 * h).collect();
    let ys: Vec<f64> = (0..=nj).map(|j| j as f64 * h).collect();
    let nx = ni + 1;
    let per_row = if n == 1 { nx } else { nx * nx };
    let mut values = vec![0.0; per_row * (nj + 1)];
    let on_edge = |i: usize| i == 0 || i == ni;
    for j in 0..=nj {
        for a in 0..nx {
            if n == 1 {
                if j == 0 || j == nj || on_edge(a) {
                    values[j * nx + a] = boundary(&[xs[a]], ys[j]);
                }
            } else {
                for b in 0..nx {
                    if j == 0 || j == nj || on_edge(a) || on_edge(b) {
                        values[(j * nx + a) * nx + b] = boundary(&[xs[a], xs[b]], ys[j]);
                    }
                }
            }
        }
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Boundary("boundary values must be finite".into()));
    }
    let coeffs: Vec<RowCoeffs> = ys
        .iter()
        .map(|&y| row_coeffs(bx.params.beta, bx.params.lambda, y.max(h), h))
        .collect();
    if n == 1 {
        solve_separable(&xs, nj, &coeffs, &mut values);
    } else {
        solve_pcg(nx, nj, &coeffs, &mut values)?;
    }
    let relative_residual = discrete_residual(n, nx, nj, &coeffs, &values);
    if !(relative_residual <= 1e-12) {
        return Err(Error::SolverNonConvergence {
            residual: relative_residual,
            iterations: 0,
        });
    }
    Ok(FdGrid {
        n,
        xs,
        ys,
        values,
        relative_residual,
    })
}

/// Applies the operator at interior node `(row j, flat index within row)`.
fn apply_at(n: usize, nx: usize, j: usize, k: usize, c: &RowCoeffs, v: &[f64]) -> f64 {
    let per_row = if n == 1 { nx } else { nx * nx };
    let at = |jj: usize, kk: usize| v[jj * per_row + kk];
    let u = at(j, k);
    let mut lx = at(j, k + 1) + at(j, k - 1) - 2.0 * u;
    if n == 2 {
        lx += at(j, k + nx) + at(j, k - nx) - 2.0 * u;
    }
    c.cx * lx + c.north * (at(j + 1, k) - u) + c.south * (at(j - 1, k) - u) - c.react * u
}

fn interior_indices(n: usize, nx: usize) -> Vec<usize> {
    if n == 1 {
        (1..nx - 1).collect()
    } else {
        (1..nx - 1)
            .flat_map(|a| (1..nx - 1).map(move |b| a * nx + b))
            .collect()
    }
}

fn discrete_residual(n: usize, nx: usize, nj: usize, coeffs: &[RowCoeffs], v: &[f64]) -> f64 {
    let idx = interior_indices(n, nx);
    let umax = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (j, c) in coeffs.iter().enumerate().take(nj).skip(1) {
        let scale = 2.0 * n as f64 * c.cx + c.north + c.south + c.react;
        for &k in &idx {
            worst = worst.max(apply_at(n, nx, j, k, c, v).abs() / (scale * umax));
        }
    }
    worst
}

/// Direct solve for `n = 1`: a sine transform diagonalizes the x coupling,
/// leaving one tridiagonal system in `y` per mode.
fn solve_separable(xs: &[f64], nj: usize, coeffs: &[RowCoeffs], values: &mut [f64]) {
    let nx = xs.len();
    let m = nx - 2;
    let rows = nj - 1;
    // right-hand side from the Dirichlet data, rows j = 1..nj-1
    let mut rhs = vec![0.0; rows * m];
    for j in 1..nj {
        let c = &coeffs[j];
        let r = &mut rhs[(j - 1) * m..j * m];
        r[0] -= c.cx * values[j * nx];
        r[m - 1] -= c.cx * values[j * nx + nx - 1];
        if j == 1 {
            for i in 0..m {
                r[i] -= c.south * values[i + 1];
            }
        }
        if j == nj - 1 {
            for i in 0..m {
                r[i] -= c.north * values[nj * nx + i + 1];
            }
        }
    }
    let s = sine_matrix(m);
    let transform = |row: &[f64], out: &mut [f64]| {
        for k in 0..m {
            let sk = &s[k * m..(k + 1) * m];
            out[k] = sk.iter().zip(row).map(|(a, b)| a * b).sum();
        }
    };
    let mut hat = vec![0.0; rows * m];
    for j in 0..rows {
        transform(&rhs[j * m..(j + 1) * m], &mut hat[j * m..(j + 1) * m]);
    }
    let nn = (m + 1) as f64;
    let mut sol_hat = vec![0.0; rows * m];
    let (mut cp, mut dp) = (vec![0.0; rows], vec![0.0; rows]);
    for k in 0..m {
        let half = std::f64::consts::PI * (k + 1) as f64 / (2.0 * nn);
        let eig = -4.0 * half.sin().powi(2);
        // Thomas algorithm; sub/super diagonals are south/north couplings
        for j in 0..rows {
            let c = &coeffs[j + 1];
            let diag = c.cx * eig - c.north - c.south - c.react;
            let lower = if j > 0 { c.south } else { 0.0 };
            let upper = if j + 1 < rows { c.north } else { 0.0 };
            let d = hat[j * m + k];
            if j == 0 {
                cp[j] = upper / diag;
                dp[j] = d / diag;
            } else {
                let den = diag - lower * cp[j - 1];
                cp[j] = upper / den;
                dp[j] = (d - lower * dp[j - 1]) / den;
            }
        }
        for j in (0..rows).rev() {
            let next = if j + 1 < rows { sol_hat[(j + 1) * m + k] } else { 0.0 };
            sol_hat[j * m + k] = dp[j] - cp[j] * next;
        }
    }
    // the sine matrix is its own inverse up to 2/N
    let mut row = vec![0.0; m];
    for j in 0..rows {
        transform(&sol_hat[j * m..(j + 1) * m], &mut row);
        for i in 0..m {
            values[(j + 1) * nx + i + 1] = row[i] * 2.0 / nn;
        }
    }
}

/// Jacobi-preconditioned conjugate gradients on the negated (positive
/// definite) operator, used for `n = 2`.
fn solve_pcg(nx: usize, nj: usize, coeffs: &[RowCoeffs], values: &mut [f64]) -> Result<()> {
    let n = 2;
    let per_row = nx * nx;
    let idx = interior_indices(n, nx);
    let unknown = |j: usize, k: usize| (j - 1) * idx.len() + k;
    let total = (nj - 1) * idx.len();
    let diag: Vec<f64> = (1..nj)
        .flat_map(|j| {
            let c = &coeffs[j];
            let d = 4.0 * c.cx + c.north + c.south + c.react;
            std::iter::repeat_n(d, idx.len())
        })
        .collect();
    // b = A(boundary only), so that -A x = b with x the interior unknowns
    let mut work = values.to_vec();
    let apply = |x: &[f64], work: &mut Vec<f64>, with_boundary: bool| -> Vec<f64> {
        for j in 1..nj {
            for (p, &k) in idx.iter().enumerate() {
                work[j * per_row + k] = x[unknown(j, p)];
            }
        }
        let mut out = vec![0.0; total];
        for j in 1..nj {
            for (p, &k) in idx.iter().enumerate() {
                let v = apply_at(n, nx, j, k, &coeffs[j], work);
                out[unknown(j, p)] = if with_boundary { v } else { -v };
            }
        }
        out
    };
    let zero = vec![0.0; total];
    let b = apply(&zero, &mut work, true);
    // zero the boundary so that further products see only the unknowns
    let mut work0 = vec![0.0; values.len()];
    let op = |x: &[f64], w: &mut Vec<f64>| apply(x, w, false);
    let b_norm = b.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut x = vec![0.0; total];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let max_iter = 20 * (total as f64).sqrt() as usize + 1000;
    let mut it = 0;
    loop {
        let rmax = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if rmax <= 1e-14 * b_norm {
            break;
        }
        if it >= max_iter {
            return Err(Error::SolverNonConvergence {
                residual: rmax / b_norm,
                iterations: it,
            });
        }
        let ap = op(&p, &mut work0);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..total {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..total {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..total {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
    }
    for j in 1..nj {
        for (q, &k) in idx.iter().enumerate() {
            values[j * per_row + k] = x[unknown(j, q)];
        }
    }
    Ok(())
}

/// Discrepancy between the finite-difference oracle and the convolution.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleComparison {
    pub max_abs: f64,
    pub mean_abs: f64,
    /// Number of compared nodes.
    pub nodes: usize,
    pub relative_residual: f64,
}

/// Cross-checks [`solve_dirichlet`] against [`fd_oracle_solve`] for `n = 1`.
///
/// Sides and top of the box take convolution values, the bottom row takes
/// `ψ` (the average of its one-sided limits at jumps). The comparison runs
/// over interior nodes on the lattice of spacing `compare_step`, which must
/// be a multiple of the box step; fixed physical nodes keep the measured
/// order meaningful near jumps of `ψ`, where the discrete error close to the
/// jump does not shrink with `h`.
pub fn oracle_vs_convolution(
    psi: &BoundarySpec,
    bx: &FdBox,
    compare_step: f64,
    cfg: &QuadratureConfig,
) -> Result<OracleComparison> {
    if bx.params.n != 1 || psi.dim() != 1 {
        return Err(Error::Geometry("the oracle comparison is implemented for n = 1".into()));
    }
    let stride = (compare_step / bx.step).round();
    if stride < 1.0 || ((compare_step / bx.step) - stride).abs() > 1e-9 * stride {
        return Err(Error::Geometry(format!(
            "comparison step {compare_step} is not a multiple of h = {}",
            bx.step
        )));
    }
    let stride = stride as usize;
    let kernel = Kernel::transformed(bx.params);
    let (ni, nj) = bx.cells()?;
    let h = bx.step;
    let xs: Vec<f64> = (0..=ni).map(|i| -bx.half_width + i as f64 * h).collect();
    let mut edge: Vec<Point> = Vec::new();
    for j in 1..=nj {
        let y = j as f64 * h;
        edge.push(Point::on_line(xs[0], y));
        edge.push(Point::on_line(xs[ni], y));
    }
    for &x in &xs[1..ni] {
        edge.push(Point::on_line(x, bx.height));
    }
    let field = solve_dirichlet(psi, &edge, &kernel, cfg)?;
    if let Some(e) = field.first_failure() {
        return Err(e);
    }
    let key = |x: f64, y: f64| ((x / h).round() as i64, (y / h).round() as i64);
    let table: std::collections::HashMap<(i64, i64), f64> = field
        .points
        .iter()
        .zip(&field.values)
        .map(|(p, v)| (key(p.x[0], p.y), *v))
        .collect();
    let grid = fd_oracle_solve(bx, |x, y| {
        if y == 0.0 {
            let eps = 1e-9 * x[0].abs().max(1.0);
            0.5 * (psi.eval(&[x[0] - eps]) + psi.eval(&[x[0] + eps]))
        } else {
            table.get(&key(x[0], y)).copied().unwrap_or(f64::NAN)
        }
    })?;
    let mut probes = Vec::new();
    let mut fd_values = Vec::new();
    for j in (stride..nj).step_by(stride) {
        for i in (stride..ni).step_by(stride) {
            probes.push(Point::on_line(xs[i], j as f64 * h));
            fd_values.push(grid.at(&[i], j));
        }
    }
    let inner = solve_dirichlet(psi, &probes, &kernel, cfg)?;
    if let Some(e) = inner.first_failure() {
        return Err(e);
    }
    let diffs: Vec<f64> = inner
        .values
        .iter()
        .zip(&fd_values)
        .map(|(a, b)| (a - b).abs())
        .collect();
    let nodes = diffs.len();
    Ok(OracleComparison {
        max_abs: diffs.iter().fold(0.0f64, |m, v| m.max(*v)),
        mean_abs: if nodes > 0 { diffs.iter().sum::<f64>() / nodes as f64 } else { 0.0 },
        nodes,
        relative_residual: grid.relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{kernel_p0, kernel_plambda};
    use std::f64::consts::PI;

    fn tp(n: usize, beta: f64, lambda: f64) -> TransformedParams {
        TransformedParams::new(n, beta, lambda).unwrap()
    }

    #[test]
    fn poisson_residual_is_small() {
        let eq = Equation::Transformed(tp(1, 0.0, 0.0));
        let u = |p: &Point| Ok(p.y / (PI * (p.x[0] * p.x[0] + p.y * p.y)));
        let r = pde_residual(u, &Point::on_line(1.0, 1.0), 1e-3, &eq).unwrap();
        assert!(r.residual.abs() <= 1e-5, "{}", r.residual);
    }

    #[test]
    fn residual_orders() {
        let t = tp(2, 0.5, 0.0);
        let o = residual_order(
            |p| kernel_p0(p, &t),
            &Point::new(vec![1.0, 0.0], 1.0),
            0.02,
            &Equation::Transformed(t),
        )
        .unwrap();
        assert!((1.8..=2.2).contains(&o.order), "{o:?}");
        let t = tp(1, -1.0, 2.0);
        let o = residual_order(
            |p| kernel_plambda(p, &t),
            &Point::on_line(1.0, 1.0),
            0.02,
            &Equation::Transformed(t),
        )
        .unwrap();
        assert!((1.8..=2.2).contains(&o.order), "{o:?}");
    }

    #[test]
    fn stencil_must_stay_inside() {
        let eq = Equation::Transformed(tp(1, 0.0, 0.0));
        let e = pde_residual(|_| Ok(1.0), &Point::on_line(0.0, 0.01), 0.01, &eq);
        assert!(matches!(e, Err(Error::Stencil { .. })));
    }

    #[test]
    fn identity_suite_poisson() {
        let k = Kernel::transformed(tp(1, 0.0, 0.0));
        let rep = identity_suite(&k, &[1.0, 0.1, 0.01], 1.0, &QuadratureConfig::default()).unwrap();
        for r in &rep.rows {
            let tail = 1.0 - 2.0 / PI * (1.0 / r.y).atan();
            assert!((r.mass - 1.0).abs() < 1e-8);
            assert!((r.tail - tail).abs() < 1e-6);
            let sup = r.y / (PI * (1.0 + r.y * r.y));
            assert!((r.sup_outside - sup).abs() < 1e-14);
        }
        assert!(rep.all_pass(), "{rep:?}");
        assert!(identity_suite(&k, &[0.1, 1.0], 1.0, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn fd_constant_boundary() {
        let b = FdBox::new(1.0, 1.0, 1.0 / 16.0, tp(1, 0.5, 0.0)).unwrap();
        let g = fd_oracle_solve(&b, |_, _| 1.0).unwrap();
        for (_, v) in g.interior() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let b2 = FdBox::new(0.5, 0.5, 1.0 / 8.0, tp(2, 0.5, 0.0)).unwrap();
        let g2 = fd_oracle_solve(&b2, |_, _| 1.0).unwrap();
        for (_, v) in g2.interior() {
            assert!((v - 1.0).abs() < 1e-11, "{v}");
        }
    }

    #[test]
    fn fd_geometry_errors() {
        assert!(FdBox::new(1.0, 1.0, 0.3, tp(1, 0.0, 0.0)).is_err());
        assert!(FdBox::new(1.0, 1.0, 0.25, tp(3, 0.0, 0.0)).is_err());
        assert!(FdBox::new(-1.0, 1.0, 0.25, tp(1, 0.0, 0.0)).is_err());
    }

    fn fd_error(beta: f64, lambda: f64, h: f64) -> f64 {
        let t = tp(1, beta, lambda);
        let exact = move |x: &[f64], y: f64| {
            if y == 0.0 {
                0.0
            } else {
                Kernel::transformed(t).eval(&Point::on_line(x[0] - 3.0, y)).unwrap()
            }
        };
        let b = FdBox::new(2.0, 1.0, h, t).unwrap();
        let g = fd_oracle_solve(&b, exact).unwrap();
        g.interior()
            .iter()
            .map(|(p, v)| (v - exact(&p.x, p.y)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn fd_second_order() {
        for &(beta, lambda) in &[(0.0, 0.0), (0.5, 0.0), (0.0, 1.0)] {
            let (a, b) = (fd_error(beta, lambda, 1.0 / 32.0), fd_error(beta, lambda, 1.0 / 64.0));
            assert!((3.5..=4.5).contains(&(a / b)), "{beta} {lambda}: {a} {b}");
        }
    }

    #[test]
    fn fd_two_dimensional_second_order() {
        let t = tp(2, 0.0, 0.0);
        let exact = move |x: &[f64], y: f64| {
            if y == 0.0 {
                0.0
            } else {
                kernel_p0(&Point::new(vec![x[0] - 1.5, x[1]], y), &t).unwrap()
            }
        };
        let err = |h: f64| {
            let g = fd_oracle_solve(&FdBox::new(0.5, 0.5, h, t).unwrap(), exact).unwrap();
            g.interior()
                .iter()
                .map(|(p, v)| (v - exact(&p.x, p.y)).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (err(1.0 / 8.0), err(1.0 / 16.0));
        assert!((3.3..=4.7).contains(&(a / b)), "{a} {b}");
    }

    #[test]
    fn oracle_with_zero_data() {
        let psi = BoundarySpec::constant(1, 0.0).unwrap();
        let b = FdBox::new(1.0, 1.0, 1.0 / 16.0, tp(1, 0.0, 0.0)).unwrap();
        let c = oracle_vs_convolution(&psi, &b, 0.25, &QuadratureConfig::default()).unwrap();
        assert_eq!(c.max_abs, 0.0);
    }
}

//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `e^z K_ν(z) = ∫_0^∞ exp(-z (cosh t - 1)) cosh(ν t) dt` by the trapezoid
/// rule, which converges geometrically for this analytic even integrand.
pub fn bessel_k_scaled_oracle(nu: f64, z: f64) -> f64 {
    let h = 1.0 / 128.0;
    let f = |t: f64| (-z * (t.cosh() - 1.0) + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp());
    let mut sum = 0.5 * f(0.0);
    let mut k = 1;
    loop {
        let v = f(k as f64 * h);
        sum += v;
        // past the peak and negligible
        if v < 1e-22 * sum && (k as f64 * h).sinh() * z > nu {
            break;
        }
        k += 1;
    }
    sum * h
}

/// `Γ(x)` for positive `x` from the product `Γ(x) = Γ(x + k) / (x (x+1) ... )`
/// and Stirling's series at a large shifted argument.
pub fn gamma_oracle(x: f64) -> f64 {
    let mut shift = 1.0;
    let mut z = x;
    while z < 30.0 {
        shift *= z;
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    let ln = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series;
    ln.exp() / shift
}

/// Poisson kernel of the half-plane.
pub fn poisson(x: f64, y: f64) -> f64 {
    y / (PI * (x * x + y * y))
}

/// Mass of the half-plane Poisson kernel outside `|x| < δ`.
pub fn poisson_tail(y: f64, delta: f64) -> f64 {
    1.0 - 2.0 / PI * (delta / y).atan()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// `lo * (hi/lo)^(k/(count-1))`.
pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| lo * (hi / lo).powf(k as f64 / (count - 1) as f64))
        .collect()
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
        .collect()
}

//! Real special functions used by the kernel formulas.
//!
//! * [`gamma`] / [`log_gamma`]: Lanczos approximation (g = 7, nine terms),
//!   extended to `x < 1/2` by reflection.
//! * [`bessel_k`] / [`bessel_k_scaled`]: modified Bessel function of the second
//!   kind `K_nu(z)` for real order `nu >= 0` and `z > 0`. The order is split as
//!   `nu = mu + N` with `|mu| <= 1/2`; `K_mu` and `K_{mu+1}` come from Temme's
//!   series for `z < 2` and from Steed's continued fraction for `z >= 2`, and
//!   the result is carried up to `nu` by forward recurrence, which is stable
//!   for `K`.
//! * [`sphere_area`]: surface area of the unit sphere in `R^n`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// Relative accuracy targets of this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecFunAccuracy {
    pub rel_tol: f64,
}

impl SpecFunAccuracy {
    pub const GAMMA: SpecFunAccuracy = SpecFunAccuracy { rel_tol: 1e-12 };
    pub const BESSEL_K: SpecFunAccuracy = SpecFunAccuracy { rel_tol: 1e-10 };

    pub fn new(rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1e-6) {
            return Err(Error::Parameter {
                name: "rel_tol",
                value: rel_tol,
                reason: "must lie in (0, 1e-6)",
            });
        }
        Ok(SpecFunAccuracy { rel_tol })
    }
}

/// Largest argument for which `Gamma(x)` is representable as an f64.
pub const GAMMA_OVERFLOW_THRESHOLD: f64 = 171.624_376_956_302_7;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Lanczos sum `A(x)` and shifted base `t = x + g + 1/2` for `Gamma(x + 1)`.
fn lanczos(x: f64) -> (f64, f64) {
    let mut a = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (a, x + LANCZOS_G + 0.5)
}

/// `sin(pi x)` with exact argument reduction.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    // fold r in [0, 2) onto [-1/2, 1/2]
    let s = if r <= 0.5 {
        r
    } else if r <= 1.5 {
        1.0 - r
    } else {
        r - 2.0
    };
    (PI * s).sin()
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma function for real, finite `x` that is not a non-positive integer.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain("gamma", format!("non-finite argument {x}")));
    }
    if is_non_positive_integer(x) {
        return Err(Error::Pole { func: "gamma", arg: x });
    }
    if x > GAMMA_OVERFLOW_THRESHOLD {
        return Err(Error::Overflow {
            func: "gamma",
            arg: x,
            threshold: GAMMA_OVERFLOW_THRESHOLD,
        });
    }
    if x < 0.5 {
        // reflection; for very negative x go through logs so the huge
        // Gamma(1 - x) does not overflow
        let s = sin_pi(x);
        let one_minus = 1.0 - x;
        if one_minus > GAMMA_OVERFLOW_THRESHOLD {
            let ln_mag = PI.ln() - s.abs().ln() - log_gamma(one_minus)?;
            return Ok(s.signum() * ln_mag.exp());
        }
        return Ok(PI / (s * gamma(one_minus)?));
    }
    let z = x - 1.0;
    let (a, t) = lanczos(z);
    // t^(z + 1/2) split in two halves so it does not overflow before e^-t
    let half = t.powf(0.5 * (z + 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-t).exp()) * a)
}

/// Natural logarithm of `Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("log_gamma", format!("argument {x} is not positive and finite")));
    }
    if x < 0.5 {
        return Ok(log_gamma(x + 1.0)? - x.ln());
    }
    let z = x - 1.0;
    let (a, t) = lanczos(z);
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + a.ln())
}

/// Surface area `2 pi^(n/2) / Gamma(n/2)` of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(domain("sphere_area", "dimension must be at least 1"));
    }
    let half = n as f64 / 2.0;
    Ok(2.0 * (half * PI.ln() - log_gamma(half)?).exp())
}

// Taylor coefficients of 1/Gamma(z) = sum_{k>=1} c_k z^k.
const RECIP_GAMMA_SERIES: [f64; 26] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
    0.000_000_000_007_782_3,
    -0.000_000_000_003_696_8,
    0.000_000_000_000_510_0,
    -0.000_000_000_000_020_6,
    -0.000_000_000_000_005_4,
    0.000_000_000_000_001_4,
    0.000_000_000_000_000_1,
];

/// Temme's auxiliary quantities for `|mu| <= 1/2`:
/// `gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)`,
/// `gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2`,
/// and `1/Gamma(1+mu)`, `1/Gamma(1-mu)`.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    // 1/Gamma(1+x) = sum_{k>=1} c_k x^(k-1); split even/odd powers
    let mut gam1 = 0.0;
    let mut gam2 = 0.0;
    let mu2 = mu * mu;
    for (idx, c) in RECIP_GAMMA_SERIES.iter().enumerate().rev() {
        let k = idx + 1;
        if k % 2 == 0 {
            // power mu^(k-2) in gam1
            gam1 = gam1 * mu2 - c;
        } else {
            gam2 = gam2 * mu2 + c;
        }
    }
    let recip_plus = gam2 - mu * gam1;
    let recip_minus = gam2 + mu * gam1;
    (gam1, gam2, recip_plus, recip_minus)
}

const SERIES_CUTOFF: f64 = 2.0;
const MAX_ITER: usize = 100_000;

/// `K_mu(z)` and `K_{mu+1}(z)` for `|mu| <= 1/2`, multiplied by `e^z` when
/// `scaled` is set.
fn bessel_k_pair(mu: f64, z: f64, scaled: bool) -> Result<(f64, f64)> {
    let eps = f64::EPSILON;
    if z < SERIES_CUTOFF {
        let half_z = 0.5 * z;
        let pimu = PI * mu;
        let fact = if pimu.abs() < eps { 1.0 } else { pimu / pimu.sin() };
        let d = -half_z.ln();
        let e = mu * d;
        let fact2 = if e.abs() < eps { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, recip_plus, recip_minus) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        // p = (z/2)^-mu Gamma(1+mu) / 2, q = (z/2)^mu Gamma(1-mu) / 2
        let mut p = 0.5 * ee / recip_plus;
        let mut q = 0.5 / (ee * recip_minus);
        let mut c = 1.0;
        let dd = half_z * half_z;
        let mut sum1 = p;
        let mu2 = mu * mu;
        let mut i = 1usize;
        loop {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * eps {
                break;
            }
            i += 1;
            if i > MAX_ITER {
                return Err(domain("bessel_k", "series failed to converge"));
            }
        }
        let k_mu = sum;
        let k_mu1 = sum1 * (2.0 / z);
        let scale = if scaled { z.exp() } else { 1.0 };
        Ok((k_mu * scale, k_mu1 * scale))
    } else {
        // Steed's algorithm for the continued fraction CF2
        let mut b = 2.0 * (1.0 + z);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu * mu;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut i = 2usize;
        loop {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < eps {
                break;
            }
            i += 1;
            if i > MAX_ITER {
                return Err(domain("bessel_k", "continued fraction failed to converge"));
            }
        }
        h *= a1;
        let mut k_mu = (PI / (2.0 * z)).sqrt() / s;
        if !scaled {
            k_mu *= (-z).exp();
        }
        let k_mu1 = k_mu * (mu + z + 0.5 - h) / z;
        Ok((k_mu, k_mu1))
    }
}

fn bessel_k_impl(nu: f64, z: f64, scaled: bool, func: &'static str) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(domain(func, format!("order {nu} must be finite and non-negative")));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain(func, format!("argument {z} must be finite and positive")));
    }
    let steps = (nu + 0.5).floor();
    let mu = nu - steps;
    let (mut k_lo, mut k_hi) = bessel_k_pair(mu, z, scaled)?;
    let two_over_z = 2.0 / z;
    for i in 1..=(steps as usize) {
        let next = (mu + i as f64) * two_over_z * k_hi + k_lo;
        k_lo = k_hi;
        k_hi = next;
        if !k_lo.is_finite() {
            break;
        }
    }
    if !k_lo.is_finite() {
        return Err(Error::Overflow {
            func,
            arg: z,
            threshold: f64::MAX,
        });
    }
    Ok(k_lo)
}

/// Modified Bessel function of the second kind `K_nu(z)`, `nu >= 0`, `z > 0`.
///
/// Returns [`Error::Underflow`] when the value is below the smallest normal
/// f64; [`bessel_k_scaled`] stays representable in that regime.
pub fn bessel_k(nu: f64, z: f64) -> Result<f64> {
    let v = bessel_k_impl(nu, z, false, "bessel_k")?;
    if v < f64::MIN_POSITIVE {
        return Err(Error::Underflow {
            func: "bessel_k",
            arg: z,
        });
    }
    Ok(v)
}

/// Exponentially scaled `e^z K_nu(z)`.
pub fn bessel_k_scaled(nu: f64, z: f64) -> Result<f64> {
    bessel_k_impl(nu, z, true, "bessel_k_scaled")
}

/// `ln K_nu(z)`, finite wherever the scaled function is.
pub fn ln_bessel_k(nu: f64, z: f64) -> Result<f64> {
    Ok(bessel_k_scaled(nu, z)?.ln() - z)
}

//! Globally adaptive 7/15-point Gauss-Kronrod quadrature over a list of
//! finite segments.
//!
//! Each segment may carry an algebraic endpoint singularity `|v - end|^gamma`
//! with `gamma` in `(-1, 0]`. Such an end is regularised by the substitution
//! `v = end +/- u^(1/(1+gamma))`, which turns the singular factor into a
//! constant. All cells of all segments share one error budget: the cell with
//! the largest error estimate is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Tolerances and budgets for every improper integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Target relative tolerance.
    pub rel_tol: f64,
    /// Absolute floor on the tolerance.
    pub abs_tol: f64,
    /// Maximum number of bisections per integral.
    pub max_subdivisions: usize,
    /// Kernel mass allowed to be discarded beyond the truncation radius.
    pub truncation_mass: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_subdivisions: 10_000,
            truncation_mass: 1e-10,
        }
    }
}

impl QuadratureConfig {
    pub fn new(
        rel_tol: f64,
        abs_tol: f64,
        max_subdivisions: usize,
        truncation_mass: f64,
    ) -> Result<Self> {
        let cfg = QuadratureConfig {
            rel_tol,
            abs_tol,
            max_subdivisions,
            truncation_mass,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::Parameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must lie in (0, 1)",
            });
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::Parameter {
                name: "abs_tol",
                value: self.abs_tol,
                reason: "must be non-negative",
            });
        }
        if self.max_subdivisions < 100 {
            return Err(Error::Parameter {
                name: "max_subdivisions",
                value: self.max_subdivisions as f64,
                reason: "must be at least 100",
            });
        }
        if !(self.truncation_mass > 0.0 && self.truncation_mass < 1.0) {
            return Err(Error::Parameter {
                name: "truncation_mass",
                value: self.truncation_mass,
                reason: "must lie in (0, 1)",
            });
        }
        Ok(())
    }

    /// Same budgets with a tighter relative tolerance, for inner integrals.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureConfig {
            rel_tol: (self.rel_tol * factor).max(1e-15),
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

/// A finite integration segment with optional endpoint singularity exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    /// Exponent `gamma` of `|v - lo|^gamma` behaviour at `lo` (0 = regular).
    pub lo_exponent: f64,
    /// Exponent of the behaviour at `hi`.
    pub hi_exponent: f64,
}

impl Segment {
    pub fn new(lo: f64, hi: f64) -> Self {
        Segment {
            lo,
            hi,
            lo_exponent: 0.0,
            hi_exponent: 0.0,
        }
    }

    pub fn with_exponents(lo: f64, hi: f64, lo_exponent: f64, hi_exponent: f64) -> Self {
        Segment {
            lo,
            hi,
            lo_exponent,
            hi_exponent,
        }
    }
}

/// Value of an integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub abs_err: f64,
    pub evaluations: usize,
}

// Gauss-Kronrod 7/15 abscissae and weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// v = origin + u^power
    FromLo { origin: f64, power: f64 },
    /// v = origin - u^power
    FromHi { origin: f64, power: f64 },
}

impl Map {
    #[inline]
    fn apply(&self, u: f64) -> (f64, f64) {
        match *self {
            Map::Identity => (u, 1.0),
            Map::FromLo { origin, power } => {
                (origin + u.powf(power), power * u.powf(power - 1.0))
            }
            Map::FromHi { origin, power } => {
                (origin - u.powf(power), power * u.powf(power - 1.0))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    map: Map,
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

fn gauss_kronrod<F>(f: &mut F, map: Map, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |u: f64| -> Result<f64> {
        let (v, jac) = map.apply(u);
        let fv = f(v)?;
        let g = fv * jac;
        if !g.is_finite() {
            return Err(crate::error::domain(
                "quadrature",
                format!("integrand is not finite at {v}"),
            ));
        }
        Ok(g)
    };
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    let f_center = eval(center)?;
    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = eval(center - x)?;
        let f2 = eval(center + x)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let err = (res_kronrod - res_gauss) * half;
    let abs_half = half.abs();
    Ok((
        res_kronrod * half,
        rescale_error(err, res_abs * abs_half, res_asc * abs_half),
    ))
}

fn cells_for(seg: &Segment) -> Vec<(Map, f64, f64)> {
    let Segment {
        lo,
        hi,
        lo_exponent,
        hi_exponent,
    } = *seg;
    let lo_sing = lo_exponent < 0.0;
    let hi_sing = hi_exponent < 0.0;
    let from_lo = |lo: f64, hi: f64| {
        let power = 1.0 / (1.0 + lo_exponent);
        (
            Map::FromLo { origin: lo, power },
            0.0,
            (hi - lo).powf(1.0 / power),
        )
    };
    let from_hi = |lo: f64, hi: f64| {
        let power = 1.0 / (1.0 + hi_exponent);
        // v decreases as u increases; the reversed orientation cancels the
        // sign of dv/du, so the jacobian is taken positive
        (
            Map::FromHi { origin: hi, power },
            0.0,
            (hi - lo).powf(1.0 / power),
        )
    };
    match (lo_sing, hi_sing) {
        (false, false) => vec![(Map::Identity, lo, hi)],
        (true, false) => vec![from_lo(lo, hi)],
        (false, true) => vec![from_hi(lo, hi)],
        (true, true) => {
            let mid = 0.5 * (lo + hi);
            vec![from_lo(lo, mid), from_hi(mid, hi)]
        }
    }
}

/// Integrates a fallible integrand over a union of segments.
pub fn try_integrate<F>(mut f: F, segments: &[Segment], cfg: &QuadratureConfig) -> Result<QuadEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    for seg in segments {
        if !(seg.lo.is_finite() && seg.hi.is_finite()) || seg.hi < seg.lo {
            return Err(crate::error::domain(
                "quadrature",
                format!("bad segment [{}, {}]", seg.lo, seg.hi),
            ));
        }
        for e in [seg.lo_exponent, seg.hi_exponent] {
            if !(e > -1.0 && e <= 0.0) {
                return Err(Error::Parameter {
                    name: "singularity_exponent",
                    value: e,
                    reason: "must lie in (-1, 0]",
                });
            }
        }
    }

    let mut heap: BinaryHeap<Cell> = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;
    let mut evaluations = 0usize;
    for seg in segments {
        if seg.hi == seg.lo {
            continue;
        }
        for (map, a, b) in cells_for(seg) {
            let (value, err) = gauss_kronrod(&mut f, map, a, b)?;
            evaluations += 15;
            heap.push(Cell {
                map,
                a,
                b,
                value,
                err,
            });
        }
    }

    let mut subdivisions = 0usize;
    let mut sum_value: f64 = heap.iter().map(|c| c.value).sum();
    let mut sum_err: f64 = heap.iter().map(|c| c.err).sum();
    loop {
        let total = frozen_value + sum_value;
        let total_err = frozen_err + sum_err;
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
        if total_err <= tol || heap.is_empty() || subdivisions >= cfg.max_subdivisions {
            // resum exactly; the running totals drift by rounding
            let total = frozen_value + heap.iter().map(|c| c.value).sum::<f64>();
            let total_err = frozen_err + heap.iter().map(|c| c.err).sum::<f64>();
            let tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
            if total_err <= tol {
                return Ok(QuadEstimate {
                    value: total,
                    abs_err: total_err,
                    evaluations,
                });
            }
            if !heap.is_empty() && subdivisions < cfg.max_subdivisions {
                sum_value = total - frozen_value;
                sum_err = total_err - frozen_err;
            } else {
                return Err(Error::NonConvergence {
                    estimate: total,
                    abs_err: total_err,
                    evaluations,
                });
            }
        }
        let worst = heap.pop().expect("heap is non-empty");
        sum_value -= worst.value;
        sum_err -= worst.err;
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if (worst.b - worst.a) <= 1e3 * f64::EPSILON * scale || mid <= worst.a || mid >= worst.b {
            frozen_value += worst.value;
            frozen_err += worst.err;
            continue;
        }
        let (v1, e1) = gauss_kronrod(&mut f, worst.map, worst.a, mid)?;
        let (v2, e2) = gauss_kronrod(&mut f, worst.map, mid, worst.b)?;
        evaluations += 30;
        subdivisions += 1;
        sum_value += v1 + v2;
        sum_err += e1 + e2;
        heap.push(Cell {
            map: worst.map,
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Cell {
            map: worst.map,
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
}

/// Integrates a plain integrand over a union of segments.
pub fn integrate<F>(mut f: F, segments: &[Segment], cfg: &QuadratureConfig) -> Result<QuadEstimate>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|v| Ok(f(v)), segments, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rel: f64) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: rel,
            abs_tol: 0.0,
            ..QuadratureConfig::default()
        }
    }

    #[test]
    fn polynomial_is_exact_on_one_cell() {
        let r = integrate(|x| x.powi(6) - 3.0 * x, &[Segment::new(0.0, 2.0)], &cfg(1e-12)).unwrap();
        assert!((r.value - (128.0 / 7.0 - 6.0)).abs() < 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn inverse_sqrt_singularity_at_either_end() {
        let lo = Segment::with_exponents(0.0, 4.0, -0.5, 0.0);
        let r = integrate(|x| 1.0 / x.sqrt(), &[lo], &cfg(1e-12)).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12, "{r:?}");
        let hi = Segment::with_exponents(0.0, 4.0, 0.0, -0.5);
        let r = integrate(|x| 1.0 / (4.0 - x).sqrt(), &[hi], &cfg(1e-12)).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12, "{r:?}");
        let both = Segment::with_exponents(0.0, 1.0, -0.5, -0.5);
        let r = integrate(|x| 1.0 / (x * (1.0 - x)).sqrt(), &[both], &cfg(1e-12)).unwrap();
        assert!((r.value - std::f64::consts::PI).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn strong_singularity_with_substitution() {
        // integral of x^-0.9 over [0, 1] is 10
        let seg = Segment::with_exponents(0.0, 1.0, -0.9, 0.0);
        let r = integrate(|x| x.powf(-0.9), &[seg], &cfg(1e-12)).unwrap();
        assert!((r.value - 10.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn jump_discontinuity_refines() {
        let r = integrate(
            |x| if x > 0.3 { 1.0 } else { 0.0 },
            &[Segment::new(0.0, 1.0)],
            &QuadratureConfig {
                rel_tol: 1e-10,
                ..QuadratureConfig::default()
            },
        )
        .unwrap();
        assert!((r.value - 0.7).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_estimate() {
        let c = QuadratureConfig {
            rel_tol: 1e-14,
            abs_tol: 0.0,
            max_subdivisions: 100,
            ..QuadratureConfig::default()
        };
        let err = integrate(|x| (1.0 / x).sin(), &[Segment::new(1e-6, 1.0)], &c).unwrap_err();
        match err {
            Error::NonConvergence { estimate, abs_err, .. } => {
                assert!(estimate.is_finite() && abs_err > 0.0)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(QuadratureConfig::new(0.0, 0.0, 1000, 1e-10).is_err());
        assert!(QuadratureConfig::new(1e-8, 0.0, 10, 1e-10).is_err());
        assert!(QuadratureConfig::new(1e-8, 1e-14, 100, 1e-10).is_ok());
    }

    #[test]
    fn rejects_bad_exponent() {
        let seg = Segment::with_exponents(0.0, 1.0, -1.0, 0.0);
        assert!(integrate(|x| x, &[seg], &cfg(1e-8)).is_err());
    }
}

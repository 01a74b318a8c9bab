mod common;

use keldysh::kernels::{Kernel, Point, ProblemParams, TransformedParams};
use keldysh::quadrature::QuadratureConfig;
use keldysh::verify::{fd_oracle_solve, identity_suite, residual_order, Equation, FdBox};
use proptest::prelude::*;

fn tp(n: usize, beta: f64, lambda: f64) -> TransformedParams {
    TransformedParams::new(n, beta, lambda).unwrap()
}

fn point(n: usize, r: f64, y: f64) -> Point {
    let mut x = vec![0.0; n];
    x[0] = r * 0.8;
    if n > 1 {
        x[1] = r * 0.6;
    }
    Point::new(x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transformed_kernel_residual_order(n in 1usize..=3, beta in -1.5f64..0.9, lambda in 0.0f64..2.0, r in 0.0f64..2.0, y in 0.5f64..2.0) {
        let k = Kernel::transformed(tp(n, beta, lambda));
        let o = residual_order(|p| k.eval(p), &point(n, r, y), 0.02 * y, &Equation::for_kernel(&k)).unwrap();
        prop_assert!((1.8..=2.2).contains(&o.order), "{:?}", o);
    }

    #[test]
    fn q_kernel_residual_order(n in 1usize..=3, m in -1.0f64..1.5, alpha in -1.0f64..0.9, lambda in 0.0f64..1.5, r in 0.0f64..2.0, y in 0.5f64..2.0) {
        let p = ProblemParams::new(n, m, alpha, lambda);
        prop_assume!(p.is_ok());
        let k = Kernel::q(p.unwrap()).unwrap();
        let eq = Equation::for_kernel(&k);
        prop_assert!(matches!(eq, Equation::Original(_)));
        let o = residual_order(|q| k.eval(q), &point(n, r, y), 0.02 * y, &eq).unwrap();
        prop_assert!((1.8..=2.2).contains(&o.order), "{:?}", o);
    }
}

fn fd_max_error(beta: f64, lambda: f64, h: f64) -> f64 {
    let k = Kernel::transformed(tp(1, beta, lambda));
    let exact = |x: &[f64], y: f64| if y == 0.0 { 0.0 } else { k.eval(&Point::on_line(x[0] - 3.0, y)).unwrap() };
    let grid = fd_oracle_solve(&FdBox::new(2.0, 1.0, h, *k.params()).unwrap(), exact).unwrap();
    grid.interior().iter().map(|(p, v)| (v - exact(&p.x, p.y)).abs()).fold(0.0, f64::max)
}

#[test]
fn fd_oracle_reproduces_kernels_at_second_order() {
    for &(beta, lambda) in &[(0.0, 0.0), (0.5, 0.0), (-1.0, 0.0), (-0.5, 1.0), (0.3, 2.0)] {
        let (a, b) = (fd_max_error(beta, lambda, 1.0 / 16.0), fd_max_error(beta, lambda, 1.0 / 32.0));
        let order = (a / b).log2();
        assert!((1.8..=2.2).contains(&order), "beta {beta} lambda {lambda}: {a:e} {b:e}");
    }
}

#[test]
fn identity_suite_flags() {
    let cfg = QuadratureConfig::default();
    let ys = [1.0, 0.1, 0.01];
    for n in 1..=3 {
        for lambda in [0.0, 1.0] {
            for beta in [-1.0, 0.0] {
                let rep = identity_suite(&Kernel::transformed(tp(n, beta, lambda)), &ys, 1.0, &cfg).unwrap();
                assert!(rep.positive() && rep.mass_ok() && rep.mass_tends_to_one(), "{n} {beta} {lambda}");
                assert!(rep.tail_decreasing() && rep.sup_decreasing(), "{n} {beta} {lambda}: {rep:?}");
                for r in &rep.rows {
                    assert!((r.mass - r.closed_form_mass).abs() <= 1e-7);
                }
            }
            // Near β = 1 the kernel spreads slowly: P_0(δ, y) ~ y^(1-β) (δ²+y²)^(-ν)
            // first grows as y decreases from 1, so only mass and positivity
            // are flagged there.
            let rep = identity_suite(&Kernel::transformed(tp(n, 0.9 - 1e-9, lambda)), &ys, 1.0, &cfg).unwrap();
            assert!(rep.positive() && rep.mass_ok() && rep.mass_tends_to_one(), "{n} 0.9 {lambda}");
        }
    }
}

#[test]
fn corrupted_constant_fails_mass_check() {
    let k = Kernel::transformed(tp(1, 0.0, 0.0));
    let bad = k.with_constant_scale(1.01);
    let rep = identity_suite(&bad, &[1.0, 0.1], 1.0, &QuadratureConfig::default()).unwrap();
    for r in &rep.rows {
        assert!((r.mass - 1.01).abs() < 1e-8);
        assert!((r.mass - k.closed_form_mass(r.y).unwrap()).abs() > 1e-3);
    }
}

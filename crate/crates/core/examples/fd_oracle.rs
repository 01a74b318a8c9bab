//! Independent finite-difference solve compared with the convolution.

use keldysh::convolve::{BoundarySpec, Piece};
use keldysh::kernels::{Kernel, Point, TransformedParams};
use keldysh::quadrature::QuadratureConfig;
use keldysh::verify::{fd_oracle_solve, oracle_vs_convolution, FdBox};

pub fn main() -> keldysh::Result<()> {
    // kernel centred outside the box as exact solution
    for beta in [0.0, 0.5] {
        let params = TransformedParams::new(1, beta, 0.0)?;
        let k = Kernel::transformed(params);
        let exact = |x: &[f64], y: f64| if y == 0.0 { 0.0 } else { k.eval(&Point::on_line(x[0] - 3.0, y)).unwrap() };
        let mut errs = Vec::new();
        for h in [1.0 / 64.0, 1.0 / 128.0] {
            let grid = fd_oracle_solve(&FdBox::new(2.0, 1.0, h, params)?, exact)?;
            errs.push(grid.interior().iter().map(|(p, v)| (v - exact(&p.x, p.y)).abs()).fold(0.0, f64::max));
        }
        println!("kernel data, beta {beta}: {:.3e} -> {:.3e}  ratio {:.3}", errs[0], errs[1], errs[0] / errs[1]);
    }

    let cfg = QuadratureConfig::default();
    println!("\nstep data against the convolution");
    let psi = BoundarySpec::line(vec![Piece::new(0.0, f64::INFINITY, |_| 1.0)], Some(1.0))?;
    for beta in [0.0, 0.5] {
        let params = TransformedParams::new(1, beta, 0.0)?;
        let mut prev: Option<f64> = None;
        for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0] {
            let bx = FdBox::new(2.0, 1.0, h, params)?;
            let c = oracle_vs_convolution(&psi, &bx, 0.125, &cfg)?;
            let ratio = prev.map(|p| format!("{:.3}", p / c.max_abs)).unwrap_or_default();
            println!(
                "beta {beta}  h = 1/{:<4} max |u_h - u| = {:.3e}  residual {:.1e}  {ratio}",
                (1.0 / h) as usize,
                c.max_abs,
                c.relative_residual
            );
            prev = Some(c.max_abs);
        }
    }
    Ok(())
}

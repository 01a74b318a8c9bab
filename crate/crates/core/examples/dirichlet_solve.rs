//! Solving the Dirichlet problem for step, singular and radial data.

use keldysh::convolve::{solve_dirichlet, BoundarySpec, Piece};
use keldysh::kernels::{Kernel, Point, TransformedParams};
use keldysh::quadrature::QuadratureConfig;

pub fn main() -> keldysh::Result<()> {
    let cfg = QuadratureConfig::default();

    let kernel = Kernel::transformed(TransformedParams::new(1, 0.5, 0.0)?);
    let step = BoundarySpec::line(vec![Piece::new(0.0, f64::INFINITY, |_| 1.0)], Some(1.0))?;
    let pts: Vec<Point> = [-2.0, -0.5, 0.0, 0.5, 2.0].iter().map(|&x| Point::on_line(x, 0.5)).collect();
    let field = solve_dirichlet(&step, &pts, &kernel, &cfg)?;
    println!("step data, beta = 0.5, y = 0.5");
    for ((p, u), d) in field.points.iter().zip(&field.values).zip(&field.diagnostics) {
        println!("  x = {:>5}  u = {u:.12}  err <= {:.1e}", p.x[0], d.total_error());
    }

    // -2 t₊^(-1/2) has an integrable endpoint singularity
    let kernel = Kernel::transformed(TransformedParams::new(1, 0.0, 0.0)?);
    let sing = BoundarySpec::line(
        vec![Piece::new(0.0, f64::INFINITY, |t| -2.0 / t.sqrt()).with_exponents(-0.5, 0.0)],
        None,
    )?;
    let u = solve_dirichlet(&sing, &[Point::on_line(0.0, 1.0)], &kernel, &cfg)?;
    println!("\nsingular data at (0, 1): {:.15} (exact {:.15})", u.values[0], -2f64.sqrt());

    let kernel = Kernel::transformed(TransformedParams::new(2, -0.5, 1.0)?);
    let gauss = BoundarySpec::radial(2, |r| (-r * r).exp(), Some(1.0))?;
    let pts: Vec<Point> = [0.0, 1.0, 3.0].iter().map(|&r| Point::new(vec![r, 0.0], 0.25)).collect();
    let field = solve_dirichlet(&gauss, &pts, &kernel, &cfg)?;
    println!("\nGaussian data, n = 2, beta = -0.5, lambda = 1, y = 0.25");
    for (p, u) in field.points.iter().zip(&field.values) {
        println!("  |x| = {}  u = {u:.12}", p.x[0]);
    }
    Ok(())
}

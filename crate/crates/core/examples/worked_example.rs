//! Boundary data x₊^(-3/2): closed form, quadrature and derivative.

use keldysh::quadrature::QuadratureConfig;
use keldysh::worked_example::{example_g, example_g_quadrature, example_u, example_u_from_derivative, ExamplePoint};

pub fn main() -> keldysh::Result<()> {
    let cfg = QuadratureConfig::default();
    println!("{:>5} {:>5} {:>20} {:>10} {:>20} {:>10}", "x", "y", "g", "quad err", "u", "diff err");
    for (x, y) in [(0.0, 1.0), (1.0, 0.1), (-1.0, 0.1), (2.0, 2.0), (-3.0, 0.5)] {
        let pt = ExamplePoint::new(x, y)?;
        let g = example_g(pt)?;
        let u = example_u(pt)?;
        println!(
            "{x:>5} {y:>5} {g:>20.15} {:>10.1e} {u:>20.15} {:>10.1e}",
            (example_g_quadrature(pt, &cfg)? - g).abs(),
            (example_u_from_derivative(pt, 1e-5)? - u).abs()
        );
    }
    println!("\nu(1, y) -> 1 and u(-1, y) -> 0:");
    for y in [0.1, 0.01, 0.001] {
        println!("  y = {y:<6} {:.8} {:.3e}", example_u(ExamplePoint::new(1.0, y)?)?, example_u(ExamplePoint::new(-1.0, y)?)?);
    }
    Ok(())
}

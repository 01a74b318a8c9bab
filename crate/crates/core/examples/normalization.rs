//! Numerical kernel mass against the closed form.

use keldysh::convolve::radial_mass;
use keldysh::kernels::{Kernel, TransformedParams};
use keldysh::quadrature::QuadratureConfig;

pub fn main() -> keldysh::Result<()> {
    let cfg = QuadratureConfig::default();
    println!("{:>2} {:>5} {:>4} {:>6} {:>20} {:>20}", "n", "beta", "lam", "y", "numeric", "closed form");
    for (n, beta, lambda) in [(1, 0.0, 0.0), (3, -0.5, 0.0), (2, 0.5, 1.0), (3, 0.9, 2.0)] {
        let kernel = Kernel::transformed(TransformedParams::new(n, beta, lambda)?);
        for y in [0.01, 1.0, 3.0] {
            let mass = radial_mass(&kernel, y, &cfg)?;
            println!(
                "{n:>2} {beta:>5} {lambda:>4} {y:>6} {mass:>20.14} {:>20.14}",
                kernel.closed_form_mass(y)?
            );
        }
    }
    Ok(())
}

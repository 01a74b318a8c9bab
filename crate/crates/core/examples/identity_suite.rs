//! The kernel as an approximate identity as y decreases.

use keldysh::kernels::{Kernel, TransformedParams};
use keldysh::quadrature::QuadratureConfig;
use keldysh::verify::identity_suite;

pub fn main() -> keldysh::Result<()> {
    let cfg = QuadratureConfig::default();
    let kernel = Kernel::transformed(TransformedParams::new(2, 0.0, 0.0)?);
    let report = identity_suite(&kernel, &[1.0, 0.1, 0.01, 0.001], 1.0, &cfg)?;
    println!("{:>6} {:>14} {:>14} {:>14} {:>14}", "y", "mass", "tail", "sup |x|>=1", "pairing");
    for r in &report.rows {
        println!("{:>6} {:>14.10} {:>14.6e} {:>14.6e} {:>14.10}", r.y, r.mass, r.tail, r.sup_outside, r.pairing);
    }
    println!(
        "positive {} mass {} tail {} sup {} pairing {}",
        report.positive(),
        report.mass_ok(),
        report.tail_decreasing(),
        report.sup_decreasing(),
        report.pairing_converging()
    );
    Ok(())
}

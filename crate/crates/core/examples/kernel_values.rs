//! Kernel values for λ = 0 and λ > 0 on a small grid.

use keldysh::kernels::{Kernel, Point, TransformedParams};

pub fn main() -> keldysh::Result<()> {
    let p0 = Kernel::p0(TransformedParams::new(2, 0.5, 0.0)?)?;
    let pl = Kernel::plambda(TransformedParams::new(2, 0.5, 1.5)?)?;
    println!("{:>6} {:>6} {:>22} {:>22}", "|x|", "y", "P_0", "P_lambda");
    for y in [0.1, 1.0] {
        for r in [0.0, 0.5, 2.0, 10.0] {
            let pt = Point::new(vec![r, 0.0], y);
            println!("{r:>6} {y:>6} {:>22.15e} {:>22.15e}", p0.eval(&pt)?, pl.eval(&pt)?);
        }
    }
    Ok(())
}

//! Finite-difference residuals of the kernel in both coordinate systems.

use keldysh::kernels::{Kernel, Point, ProblemParams, TransformedParams};
use keldysh::verify::{residual_order, Equation};

pub fn main() -> keldysh::Result<()> {
    let h = 0.01;
    let pt = Point::new(vec![0.3, -0.2], 0.8);

    let kernel = Kernel::transformed(TransformedParams::new(2, 0.4, 1.0)?);
    let eq = Equation::for_kernel(&kernel);
    let c = residual_order(|p: &Point| kernel.eval(p), &pt, h, &eq)?;
    println!("{}: r(h) = {:.3e}  r(h/2) = {:.3e}  order {:.3}", eq.name(), c.residual_h, c.residual_half, c.order);

    let q = Kernel::q(ProblemParams::new(2, 1.0, 0.7, 1.0)?)?;
    let eq = Equation::for_kernel(&q);
    let c = residual_order(|p: &Point| q.eval(p), &pt, h, &eq)?;
    println!("{}: r(h) = {:.3e}  r(h/2) = {:.3e}  order {:.3}", eq.name(), c.residual_h, c.residual_half, c.order);
    Ok(())
}

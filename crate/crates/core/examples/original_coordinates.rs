//! Working in the original variable y with the kernel Q.

use keldysh::kernels::{kernel_q, to_transformed, transform_y, Kernel, Point, ProblemParams};

pub fn main() -> keldysh::Result<()> {
    let p = ProblemParams::new(1, 1.0, 0.25, 0.5)?;
    let tp = to_transformed(&p)?;
    println!("m = {}, alpha = {} -> beta = {}", p.m, p.alpha, tp.beta);
    let q = Kernel::q(p)?;
    for y in [0.01, 0.25, 1.0] {
        let eta = transform_y(p.m, y)?;
        let pt = Point::on_line(0.5, y);
        println!(
            "y = {y:<5} eta = {eta:.6}  Q = {:.15e}  direct = {:.15e}  mass = {:.12}",
            q.eval(&pt)?,
            kernel_q(&pt, &p)?,
            q.closed_form_mass(y)?
        );
    }
    Ok(())
}

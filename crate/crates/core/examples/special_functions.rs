//! Gamma and K_ν values, including the exponentially scaled form.

use keldysh::specfun::{bessel_k, bessel_k_scaled, gamma, log_gamma, sphere_area};

pub fn main() -> keldysh::Result<()> {
    println!("{:>6} {:>22} {:>22}", "x", "gamma", "log_gamma");
    for x in [0.5, 1.0, 2.5, 10.0, 200.0] {
        let g = gamma(x).map_or("overflow".to_string(), |g| format!("{g:.15e}"));
        println!("{x:>6} {g:>22} {:>22.15e}", log_gamma(x)?);
    }
    // Γ(x) Γ(1 - x) = π / sin(πx)
    let x = -1.5;
    let pi = std::f64::consts::PI;
    println!("reflection at {x}: {:.2e}", (gamma(x)? * gamma(1.0 - x)? - pi / (pi * x).sin()).abs());
    println!();
    println!("{:>5} {:>8} {:>22} {:>22}", "nu", "z", "K_nu(z)", "e^z K_nu(z)");
    for nu in [0.0, 0.5, 1.25, 3.0] {
        for z in [0.01, 1.0, 50.0] {
            println!("{nu:>5} {z:>8} {:>22.15e} {:>22.15e}", bessel_k(nu, z)?, bessel_k_scaled(nu, z)?);
        }
    }
    // K_{1/2}(z) = √(π / 2z) e^(-z)
    let z = 2.0;
    let exact = (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp();
    println!("\nK_1/2(2) error: {:.2e}", (bessel_k(0.5, z)? - exact).abs());
    println!("|S^2| = {} (4π = {})", sphere_area(3)?, 4.0 * std::f64::consts::PI);
    Ok(())
}

// Each example is compiled as a module here so `cargo test` runs it.

#[path = "../examples/special_functions.rs"]
mod special_functions;
#[path = "../examples/kernel_values.rs"]
mod kernel_values;
#[path = "../examples/normalization.rs"]
mod normalization;
#[path = "../examples/dirichlet_solve.rs"]
mod dirichlet_solve;
#[path = "../examples/identity_suite.rs"]
mod identity_suite;
#[path = "../examples/pde_residuals.rs"]
mod pde_residuals;
#[path = "../examples/fd_oracle.rs"]
mod fd_oracle;
#[path = "../examples/worked_example.rs"]
mod worked_example;
#[path = "../examples/original_coordinates.rs"]
mod original_coordinates;

#[test]
fn special_functions_runs() {
    special_functions::main().unwrap();
}

#[test]
fn kernel_values_runs() {
    kernel_values::main().unwrap();
}

#[test]
fn normalization_runs() {
    normalization::main().unwrap();
}

#[test]
fn dirichlet_solve_runs() {
    dirichlet_solve::main().unwrap();
}

#[test]
fn identity_suite_runs() {
    identity_suite::main().unwrap();
}

#[test]
fn pde_residuals_runs() {
    pde_residuals::main().unwrap();
}

#[test]
fn fd_oracle_runs() {
    fd_oracle::main().unwrap();
}

#[test]
fn worked_example_runs() {
    worked_example::main().unwrap();
}

#[test]
fn original_coordinates_runs() {
    original_coordinates::main().unwrap();
}

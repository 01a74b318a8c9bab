fn main() {
    std::process::exit(keldysh::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(jacobi_gap::cli::run(std::env::args_os()));
}

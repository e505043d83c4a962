fn main() {
    std::process::exit(dirac_floquet::cli::run_from_args(std::env::args_os()));
}

fn main() {
    std::process::exit(opnet::cli::run_from_args(std::env::args_os()));
}

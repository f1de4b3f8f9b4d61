fn main() {
    std::process::exit(qgen::cli::run_from_args(std::env::args_os()));
}

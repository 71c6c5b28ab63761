fn main() {
    std::process::exit(mcckf::cli::run_cli(std::env::args_os()));
}

fn main() {
    std::process::exit(perfect_sampling::cli::run_cli(std::env::args_os()));
}

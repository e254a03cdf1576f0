fn main() {
    std::process::exit(sensing_tradeoff::cli::run_cli(std::env::args_os()));
}

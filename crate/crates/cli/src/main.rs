fn main() {
    std::process::exit(mapcheck_cli::run_cli(std::env::args_os()));
}

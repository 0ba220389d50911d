fn main() {
    std::process::exit(sdrd_cli::run_cli(std::env::args_os()));
}

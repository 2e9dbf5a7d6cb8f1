fn main() {
    std::process::exit(csmbench_cli::cli::run(std::env::args_os()));
}

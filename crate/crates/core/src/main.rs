fn main() {
    std::process::exit(isac_market::cli::run(std::env::args_os()));
}

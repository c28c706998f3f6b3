fn main() {
    std::process::exit(softkill_cli::cli_main(std::env::args()));
}

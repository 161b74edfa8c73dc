fn main() {
    std::process::exit(kaf_cli::run_main());
}

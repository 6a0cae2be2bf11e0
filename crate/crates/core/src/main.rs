fn main() {
    std::process::exit(prefdiff::experiments::cli_main(std::env::args_os()));
}

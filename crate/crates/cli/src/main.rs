fn main() {
    std::process::exit(rfpca_cli::run(std::env::args_os()));
}

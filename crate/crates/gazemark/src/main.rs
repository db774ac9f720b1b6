fn main() {
    std::process::exit(gazemark::cli::run(std::env::args_os()));
}

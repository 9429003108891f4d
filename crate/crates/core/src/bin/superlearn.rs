fn main() {
    std::process::exit(superlearn::cli::run(std::env::args_os()));
}

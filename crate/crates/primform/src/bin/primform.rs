fn main() {
    std::process::exit(primform::cli::run(std::env::args_os()));
}

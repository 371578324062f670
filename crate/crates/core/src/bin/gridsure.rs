fn main() {
    std::process::exit(gridsure::cli::run(std::env::args_os()));
}

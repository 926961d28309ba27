fn main() {
    std::process::exit(unitgrad::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(heunwell::cli::run(std::env::args()));
}

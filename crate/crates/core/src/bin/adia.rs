fn main() {
    std::process::exit(adia::cli::run(std::env::args_os()));
}

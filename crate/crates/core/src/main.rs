fn main() {
    std::process::exit(limit_circle::cli::run(std::env::args_os()));
}

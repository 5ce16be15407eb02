fn main() {
    std::process::exit(bergman_shells::cli::run(std::env::args_os()));
}

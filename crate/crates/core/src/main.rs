fn main() {
    std::process::exit(instanton::cli::run(std::env::args_os()));
}

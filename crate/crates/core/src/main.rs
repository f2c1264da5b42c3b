fn main() {
    std::process::exit(ftlab::cli::run(std::env::args_os()));
}

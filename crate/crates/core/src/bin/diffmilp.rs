fn main() {
    std::process::exit(diffmilp::cli::run(std::env::args_os()));
}

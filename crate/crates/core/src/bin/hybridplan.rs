fn main() {
    std::process::exit(hybridplan::cli::main_with_args(std::env::args_os()));
}

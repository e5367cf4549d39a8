fn main() {
    std::process::exit(tunnelhist::cli::main_with_args(std::env::args_os()));
}

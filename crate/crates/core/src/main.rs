fn main() {
    std::process::exit(edgefield::cli::main_with_args(std::env::args_os()));
}

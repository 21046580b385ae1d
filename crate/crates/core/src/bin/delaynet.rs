fn main() {
    std::process::exit(delaynet::cli::main_with_args(std::env::args_os()));
}

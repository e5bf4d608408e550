fn main() {
    std::process::exit(neckflow::cli::main_with_args(std::env::args_os()));
}

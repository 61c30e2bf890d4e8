fn main() {
    std::process::exit(semiosa::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(tdfault::cli::main_from_args(std::env::args_os()));
}

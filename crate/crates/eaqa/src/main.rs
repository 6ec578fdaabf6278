fn main() {
    std::process::exit(eaqa::cli::main_with_args(std::env::args_os()));
}

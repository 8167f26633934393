fn main() {
    std::process::exit(bfk_lab::cli::main_with_args(std::env::args_os()));
}

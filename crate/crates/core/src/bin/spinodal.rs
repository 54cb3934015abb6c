fn main() {
    std::process::exit(spinodal::cli::main_with_args(std::env::args_os()));
}

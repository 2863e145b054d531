fn main() {
    std::process::exit(morphkit::cli::main_with_args(std::env::args_os()));
}

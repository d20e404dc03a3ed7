fn main() {
    std::process::exit(everett::cli::main_with(std::env::args_os()));
}

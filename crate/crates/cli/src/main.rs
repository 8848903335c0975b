fn main() {
    std::process::exit(chainwarn_cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(circpat_cli::main_with(std::env::args_os()));
}

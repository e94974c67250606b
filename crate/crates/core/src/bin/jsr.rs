fn main() {
    std::process::exit(jsr_core::cli::main_with(std::env::args_os()));
}

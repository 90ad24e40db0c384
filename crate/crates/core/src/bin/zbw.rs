fn main() {
    std::process::exit(zbw_core::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(sympf::cli::main_with_args(std::env::args_os()));
}

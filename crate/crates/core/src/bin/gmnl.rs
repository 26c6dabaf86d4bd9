fn main() {
    std::process::exit(gmnl::cli::main_with_args(std::env::args_os()));
}

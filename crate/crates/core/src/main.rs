fn main() {
    std::process::exit(rcbf::cli::main_with_args(std::env::args_os()));
}

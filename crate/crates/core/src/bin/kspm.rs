fn main() {
    std::process::exit(kspm::cli::main_with_args(std::env::args_os()));
}

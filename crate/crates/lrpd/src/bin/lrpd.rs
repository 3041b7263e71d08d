fn main() {
    std::process::exit(lrpd::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(shampoo_harness::cli::main_with_args(std::env::args_os()));
}

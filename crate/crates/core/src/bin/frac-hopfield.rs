fn main() {
    std::process::exit(frac_hopfield::cli::main_with_args(std::env::args_os()));
}

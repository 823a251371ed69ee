fn main() {
    std::process::exit(cwc_sim::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(ipd_basins::cli::main_with_args(std::env::args_os()));
}

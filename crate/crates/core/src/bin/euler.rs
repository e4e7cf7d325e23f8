fn main() {
    std::process::exit(euler_rl::cli::main_with_args(std::env::args_os()));
}

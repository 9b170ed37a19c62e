fn main() {
    std::process::exit(qdflow_cli::main_with_args(std::env::args_os()));
}

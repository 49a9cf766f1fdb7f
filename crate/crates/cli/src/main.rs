fn main() {
    std::process::exit(chamberwalk_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(spinfock_cli::run(std::env::args_os()));
}

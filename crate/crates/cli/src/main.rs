fn main() {
    std::process::exit(c2u_cli::run(std::env::args_os()));
}

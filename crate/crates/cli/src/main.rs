fn main() {
    std::process::exit(plurality_cli::run(std::env::args_os()));
}

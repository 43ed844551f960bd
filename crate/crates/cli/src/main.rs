fn main() {
    std::process::exit(coauthor_cli::run(std::env::args_os()));
}

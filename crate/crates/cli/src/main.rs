fn main() {
    std::process::exit(kemeny_cli::run(std::env::args_os()));
}

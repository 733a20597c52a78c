fn main() {
    std::process::exit(mtroute::cli::run(std::env::args_os()));
}

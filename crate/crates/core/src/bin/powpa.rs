fn main() {
    std::process::exit(powpa::cli::run(std::env::args_os().skip(1)));
}

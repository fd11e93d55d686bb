fn main() {
    std::process::exit(happyreg::cli::run(std::env::args_os()));
}

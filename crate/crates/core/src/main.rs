fn main() {
    std::process::exit(gsp4::cli::run(std::env::args_os()));
}

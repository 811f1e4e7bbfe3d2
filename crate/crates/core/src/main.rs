fn main() {
    std::process::exit(jeedep::cli::run(std::env::args_os()));
}

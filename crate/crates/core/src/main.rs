fn main() {
    std::process::exit(reuse_forge::cli::run(std::env::args_os()));
}

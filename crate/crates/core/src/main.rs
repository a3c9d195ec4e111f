fn main() {
    std::process::exit(gl4k::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(canonform::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(susylab::cli::run(std::env::args_os()));
}

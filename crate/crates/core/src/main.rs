fn main() {
    std::process::exit(rdllf::cli::run(std::env::args_os()));
}

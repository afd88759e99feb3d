fn main() {
    std::process::exit(ksoliton::cli::run(std::env::args_os()));
}

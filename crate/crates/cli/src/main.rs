fn main() {
    std::process::exit(rotdop_cli::run(std::env::args_os()));
}

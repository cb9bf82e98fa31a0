fn main() {
    std::process::exit(snqam_cli::run(std::env::args_os()));
}

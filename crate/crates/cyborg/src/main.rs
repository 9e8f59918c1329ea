fn main() {
    std::process::exit(cyborg::cli::run(std::env::args_os()));
}

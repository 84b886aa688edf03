fn main() {
    std::process::exit(gaitforge_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(semloss_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(levymap_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(vilog::cli::run(std::env::args_os()));
}

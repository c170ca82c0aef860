fn main() {
    std::process::exit(sdmapkit_cli::run(std::env::args_os()));
}

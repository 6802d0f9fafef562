fn main() {
    std::process::exit(wvtomo::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(entscale::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(nhcz::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(star_core::cli::main(std::env::args_os()));
}

fn main() {
    std::process::exit(mcjulia::cli::parse_and_dispatch(std::env::args_os()));
}

fn main() {
    std::process::exit(arrayemu::cli::parse_and_dispatch(std::env::args_os()));
}

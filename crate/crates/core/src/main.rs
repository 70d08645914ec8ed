fn main() {
    std::process::exit(crwsn::cli::main_with_args(std::env::args_os()));
}

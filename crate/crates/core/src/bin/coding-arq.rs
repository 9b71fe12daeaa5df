fn main() {
    std::process::exit(coding_arq::cli::run_command(std::env::args_os()));
}

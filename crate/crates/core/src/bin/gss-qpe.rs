fn main() {
    std::process::exit(gss_qpe::cli::run_cli(std::env::args_os()));
}

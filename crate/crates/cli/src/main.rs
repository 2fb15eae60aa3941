fn main() {
    std::process::exit(condldp_cli::run(std::env::args_os()));
}

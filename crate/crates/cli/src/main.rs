fn main() {
    std::process::exit(quasiprob_cli::run(std::env::args_os()));
}

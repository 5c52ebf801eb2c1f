fn main() {
    std::process::exit(rvlab_cli::run(std::env::args_os()));
}

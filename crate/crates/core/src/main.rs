fn main() {
    std::process::exit(patchflow::cli::run_from(std::env::args_os()));
}

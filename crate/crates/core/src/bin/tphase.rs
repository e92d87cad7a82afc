fn main() {
    std::process::exit(tensor_phase::cli::run(std::env::args_os()));
}

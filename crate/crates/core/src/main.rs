fn main() {
    std::process::exit(bell_lab::cli::run(std::env::args_os()));
}

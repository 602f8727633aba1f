fn main() {
    std::process::exit(levy_mlmc::cli::run(std::env::args_os()));
}

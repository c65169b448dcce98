fn main() {
    std::process::exit(mfusion::cli::run(std::env::args_os()));
}

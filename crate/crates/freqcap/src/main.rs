fn main() {
    std::process::exit(freqcap::cli::run(std::env::args()));
}

fn main() {
    std::process::exit(invseq::cli::run());
}

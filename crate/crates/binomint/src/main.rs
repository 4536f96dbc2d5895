fn main() {
    std::process::exit(binomint::cli::run());
}

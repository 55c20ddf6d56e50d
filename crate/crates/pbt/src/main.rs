fn main() {
    std::process::exit(pbt::cli::run());
}

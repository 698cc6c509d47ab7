fn main() {
    std::process::exit(conescatter::cli::run());
}

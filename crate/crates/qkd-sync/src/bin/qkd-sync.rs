fn main() {
    std::process::exit(qkd_sync::cli::run());
}

fn main() {
    std::process::exit(hitcrest::cli::run());
}

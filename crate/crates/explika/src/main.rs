fn main() {
    std::process::exit(explika::cli::run());
}

fn main() {
    std::process::exit(ucdesk::cli::run());
}

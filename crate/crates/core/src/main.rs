fn main() {
    std::process::exit(rittlab::cli::run(std::env::args()));
}

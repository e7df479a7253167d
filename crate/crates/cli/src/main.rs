fn main() {
    std::process::exit(predkit::run(std::env::args().collect()));
}

fn main() {
    std::process::exit(boussinesq::cli::run(std::env::args().collect()));
}

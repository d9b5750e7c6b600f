fn main() {
    std::process::exit(lce_plucker::cli::run());
}

fn main() {
    std::process::exit(findtrack_core::cli::main());
}

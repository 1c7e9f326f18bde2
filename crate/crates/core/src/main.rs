fn main() {
    std::process::exit(orchestra::cli::main());
}

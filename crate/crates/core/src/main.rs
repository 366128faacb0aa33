fn main() {
    std::process::exit(pseudomode::cli::main_entry());
}

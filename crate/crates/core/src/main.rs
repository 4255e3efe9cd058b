fn main() {
    std::process::exit(swdelay::cli::main_entry());
}

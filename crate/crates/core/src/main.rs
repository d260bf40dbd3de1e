fn main() {
    std::process::exit(primerec::cli::main_entry());
}

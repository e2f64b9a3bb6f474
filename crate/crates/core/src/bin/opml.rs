fn main() {
    std::process::exit(opml::cli::main_entry());
}

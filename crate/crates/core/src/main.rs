fn main() {
    std::process::exit(dualgraph::cli::run(std::env::args_os()));
}

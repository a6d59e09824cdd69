fn main() {
    std::process::exit(tricluster::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(qrom_lab::cli::dispatch(std::env::args_os()));
}

fn main() {
    std::process::exit(qtraj_cli::run(std::env::args_os()));
}

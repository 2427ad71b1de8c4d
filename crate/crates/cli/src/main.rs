fn main() {
    std::process::exit(dualwave::run(std::env::args_os()));
}

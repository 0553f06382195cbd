fn main() {
    std::process::exit(gfix::run(std::env::args_os()));
}

fn main() {
    std::process::exit(oscnet::runner::run(std::env::args_os()));
}

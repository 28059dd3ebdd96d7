fn main() {
    std::process::exit(xlab::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(kktlu_bench::cli::run(std::env::args_os()));
}

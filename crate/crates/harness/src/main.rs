fn main() {
    std::process::exit(leray_strip_harness::cli::run(std::env::args_os()));
}

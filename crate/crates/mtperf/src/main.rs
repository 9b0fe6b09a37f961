fn main() -> std::process::ExitCode {
    mtperf::cli::main()
}

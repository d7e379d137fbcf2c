fn main() -> std::process::ExitCode {
    hddcor::cli::main()
}

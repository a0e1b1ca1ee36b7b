fn main() -> std::process::ExitCode {
    rf_lab::cli::main()
}

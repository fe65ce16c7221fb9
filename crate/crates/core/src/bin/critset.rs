fn main() -> std::process::ExitCode {
    critset::cli::main()
}

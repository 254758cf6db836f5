fn main() -> std::process::ExitCode {
    cobra::cli::main()
}

fn main() -> std::process::ExitCode {
    enclosure::cli::main()
}

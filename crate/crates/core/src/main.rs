fn main() -> std::process::ExitCode {
    magyari::cli::main()
}

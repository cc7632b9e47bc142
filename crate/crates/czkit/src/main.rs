fn main() -> std::process::ExitCode {
    czkit::cli::main()
}

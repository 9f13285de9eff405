fn main() -> std::process::ExitCode {
    adathresh::cli::main()
}

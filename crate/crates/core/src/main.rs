pub fn main() -> std::process::ExitCode {
    berezin_lab::cli::run()
}

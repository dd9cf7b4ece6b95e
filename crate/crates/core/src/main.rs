use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(starframe::harness::cli::run())
}

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(escape_lab::cli::run(std::env::args_os()))
}

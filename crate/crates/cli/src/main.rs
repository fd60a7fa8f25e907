use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cgf_cli::run(std::env::args_os()))
}

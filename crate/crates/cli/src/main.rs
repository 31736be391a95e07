use std::process::ExitCode;

fn main() -> ExitCode {
    let code = tubal_cli::run_cli(std::env::args_os(), &mut std::io::stdout().lock());
    ExitCode::from(code as u8)
}

use std::process::ExitCode;

fn main() -> ExitCode {
    match catastrophe_cli::run_from_args(std::env::args()) {
        Ok(status) => ExitCode::from(status.code()),
        Err(catastrophe_cli::CliError::Clap(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (out, err, status) = forcelab::cli::run(std::env::args_os());
    // a closed pipe on stdout is not worth a panic
    let _ = std::io::stdout().write_all(out.as_bytes());
    let _ = std::io::stderr().write_all(err.as_bytes());
    ExitCode::from(status as u8)
}

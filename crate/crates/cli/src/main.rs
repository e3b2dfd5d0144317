use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (text, code) = kmetric_cli::run(std::env::args());
    let mut out = std::io::stdout().lock();
    // a closed pipe is not worth a panic
    let _ = out.write_all(text.as_bytes());
    ExitCode::from(code as u8)
}

use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let out = kleinian2::cli::run(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.stdout.as_bytes());
    let _ = stdout.flush();
    ExitCode::from(out.status as u8)
}

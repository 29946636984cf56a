use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, out) = heisenspec::cli::dispatch(std::env::args_os());
    let written = if code == heisenspec::cli::EXIT_OK {
        std::io::stdout().lock().write_all(&out)
    } else {
        std::io::stderr().lock().write_all(&out)
    };
    if written.is_err() {
        return ExitCode::from(1);
    }
    ExitCode::from(code as u8)
}

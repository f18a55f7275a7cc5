use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = ner_cli::run(std::env::args_os(), &mut out);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string();
            if message.starts_with("error:") {
                eprint!("{message}");
            } else {
                eprintln!("error: {message}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

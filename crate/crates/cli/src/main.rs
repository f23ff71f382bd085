use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = vrsgd_cli::cli_main(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code.clamp(0, 255) as u8)
}

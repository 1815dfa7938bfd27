use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = mucorr::cli::main_with_args(std::env::args_os(), &mut io::stdout().lock());
    ExitCode::from(code as u8)
}

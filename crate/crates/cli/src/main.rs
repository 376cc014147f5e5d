use std::io::{stderr, stdin, stdout};
use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let code = netctrl_cli::run(&argv, &mut stdin().lock(), &mut stdout().lock(), &mut stderr().lock());
    ExitCode::from(code as u8)
}

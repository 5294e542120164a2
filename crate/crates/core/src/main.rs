use std::process::ExitCode;

fn main() -> ExitCode {
    let code = x3hd::toolkit::cli::run(std::env::args_os());
    ExitCode::from(code)
}

use std::process::ExitCode;

fn main() -> ExitCode {
    isp_limits::cli::run(std::env::args_os())
}

use std::process::ExitCode;

fn main() -> ExitCode {
    evkit::cli::run(std::env::args_os())
}

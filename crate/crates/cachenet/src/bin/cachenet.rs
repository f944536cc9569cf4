use std::process::ExitCode;

fn main() -> ExitCode {
    cachenet::cli::main_with(std::env::args_os())
}

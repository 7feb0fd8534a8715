use std::process::ExitCode;

fn main() -> ExitCode {
    cubesample_cli::args::main_with(std::env::args_os())
}

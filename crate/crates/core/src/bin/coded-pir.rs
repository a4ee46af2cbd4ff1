use std::process::ExitCode;

fn main() -> ExitCode {
    coded_pir::cli::main_with_args(std::env::args_os())
}

use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(cayley_gibbs_cli::main_with(std::env::args_os()))
}

use std::process::ExitCode;

fn main() -> ExitCode {
    pnpchain::cli::main_entry()
}

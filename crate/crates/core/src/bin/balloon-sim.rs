use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = balloon_sim::cli::main_with_args(
        std::env::args_os(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    );
    ExitCode::from(code as u8)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lockstep_sim::{run_builtin, InterleaveCase, Scenario};

#[derive(Parser)]
#[command(name = "lockstep-sim", about = "Virtual-time lockstep simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and print its report.
    Run { scenario: PathBuf },
    /// Check every interleaving of a case file's message lists.
    Interleave { case: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario } => read(&scenario)
            .and_then(|text| Scenario::from_toml(&text).map_err(|e| e.to_string()))
            .and_then(|sc| run_builtin(&sc).map_err(|e| e.to_string()))
            .map(|report| {
                print!("{}", report.render());
                report.consistent() && report.smoothing_settled()
            }),
        Command::Interleave { case } => read(&case)
            .and_then(|text| InterleaveCase::from_toml(&text).map_err(|e| e.to_string()))
            .map(|case| match case.run() {
                Ok(out) => {
                    println!("interleavings={} result=equal", out.checked);
                    true
                }
                Err(e) => {
                    println!("result=failed");
                    println!("{e}");
                    false
                }
            }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use clap::Parser;

use retake::commands::{run, Cli};
use retake::ErrorKind;

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli.command) {
        // One JSON object per failure, machine-readable, on stderr.
        eprintln!("{}", serde_json::json!({ "error": e.code(), "message": e.to_string() }));
        std::process::exit(match e.kind() {
            ErrorKind::Input => 2,
            ErrorKind::Processing => 3,
        });
    }
}

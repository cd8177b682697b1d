use std::io::Write;
use std::process::ExitCode;

use bquant_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let outcome = run(&cli);
    // ignore broken pipes, e.g. `bquant quantize f | head`
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    if let Some(p) = &outcome.payload {
        eprintln!("wrote {}", p.display());
    }
    ExitCode::from(outcome.code as u8)
}

mod args;
mod commands;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

use args::RunConfig;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HOLOSHEAR_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or(format!("HOLOSHEAR_THREADS: bad value {v:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    let result = threads().and_then(|()| commands::run(&cfg.command));
    let out = match result {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    for line in &out.lines {
        eprintln!("{line}");
    }
    match &cfg.report {
        Some(path) => {
            if let Err(e) = fs::write(path, format!("{}\n", out.json)) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        }
        None => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(io::stdout(), "{}", out.json);
        }
    }
    if out.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

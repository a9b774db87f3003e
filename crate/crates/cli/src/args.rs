use std::path::PathBuf;

use clap::{Parser, Subcommand};
use holoshear::{Lambda, Space};

/// Shear coordinates, holonomies and Whitehead moves on fat graphs.
///
/// Graph arguments accept a JSON file or the name of a bundled graph
/// (torus, sphere3, sphere4, genus2). Set HOLOSHEAR_THREADS to cap the
/// number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "holoshear", version)]
pub struct RunConfig {
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a graph file and report its topology and Poisson data.
    Validate {
        #[arg(long)]
        graph: String,
    },
    /// Holonomy, trace and length of a closed path.
    Holonomy {
        #[arg(long)]
        graph: String,
        /// Coordinate file; zero shear coordinates when omitted.
        #[arg(long)]
        coords: Option<PathBuf>,
        /// Comma-separated oriented edges (`a,-b`) or `face:N`.
        #[arg(long)]
        path: String,
        /// Needed when the coordinates do not carry Λ.
        #[arg(long, value_parser = parse_lambda, allow_negative_numbers = true)]
        lambda: Option<Lambda>,
    },
    /// Draw a seeded point satisfying the face constraints.
    Sample {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        space: Space,
        #[arg(long, value_parser = parse_lambda, allow_negative_numbers = true, default_value = "1")]
        lambda: Lambda,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    #[command(subcommand)]
    Moves(MovesCommand),
    /// Run the acceptance battery.
    Accept {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Override every per-criterion sample count.
        #[arg(long)]
        samples: Option<usize>,
        /// Override every numeric tolerance.
        #[arg(long, value_parser = parse_tol)]
        tol: Option<f64>,
        /// Graphs to use instead of the bundled ones (repeatable).
        #[arg(long)]
        graph: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MovesCommand {
    /// Apply moves at the given edges in order.
    Apply {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        coords: PathBuf,
        /// Comma-separated edge labels.
        #[arg(long)]
        edge: String,
        /// Λ for cotangent coordinates.
        #[arg(long, value_parser = parse_lambda, allow_negative_numbers = true)]
        lambda: Option<Lambda>,
    },
    /// Check the groupoid relations on seeded samples.
    Relations {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        space: Space,
        #[arg(long, value_parser = parse_lambda, allow_negative_numbers = true, default_value = "1")]
        lambda: Lambda,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_parser = parse_tol, default_value = "1e-9")]
        tol: f64,
    },
}

fn parse_lambda(s: &str) -> Result<Lambda, String> {
    let v: i64 = s.parse().map_err(|_| format!("expected -1, 0 or 1, got {s:?}"))?;
    Lambda::from_value(v).map_err(|e| e.to_string())
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("tolerance must be a positive number, got {s:?}")),
    }
}

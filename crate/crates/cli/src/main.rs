//! `stixel` — batch front end for the stixel toolkit.
//!
//! Subcommands: `generate` (LiDAR ground truth), `decode` (network output
//! to stixels), `evaluate` (precision/recall sweep + PR curves),
//! `cluster` (DBSCAN object grouping) and `bench` (latency measurement).
//!
//! Exit codes: 0 on success, 1 on data or format errors, 2 on usage or
//! configuration errors. Diagnostics go to standard error.

mod bench;
mod cluster_cmd;
mod decode_cmd;
mod evaluate;
mod generate;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "stixel", version, about = "Stixel World toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate stixel ground truth from a LiDAR point cloud.
    Generate(generate::GenerateArgs),
    /// Decode a network output tensor into a stixel world.
    Decode(decode_cmd::DecodeArgs),
    /// Evaluate predictions against 3D box annotations.
    Evaluate(evaluate::EvaluateArgs),
    /// Group a world's stixels into object clusters.
    Cluster(cluster_cmd::ClusterArgs),
    /// Measure decode or clustering latency on random inputs.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => generate::run(&args),
        Command::Decode(args) => decode_cmd::run(&args),
        Command::Evaluate(args) => evaluate::run(&args),
        Command::Cluster(args) => cluster_cmd::run(&args),
        Command::Bench(args) => bench::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}

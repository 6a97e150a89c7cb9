//! `stixel decode` — tensor file to stixel world.

use std::path::PathBuf;

use clap::Args;
use stixel_core::tensor::{decode, PredictionTensor};
use stixel_core::{CameraCalib, Result};

use crate::io::{file_stem, write_world, GridArgs};

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Network output tensor file.
    #[arg(long)]
    pub tensor: PathBuf,
    /// Camera calibration JSON.
    #[arg(long)]
    pub calib: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Keep cells whose probability strictly exceeds this.
    #[arg(long)]
    pub threshold: f64,
    /// Output world: .json for JSON, anything else for the wire format.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &DecodeArgs) -> Result<()> {
    let calib = CameraCalib::load(&args.calib)?;
    let tensor = PredictionTensor::load(&args.tensor)?;
    let grid = args.grid.build()?;
    let (mut world, summary) = decode(&tensor, &calib, &grid, args.threshold)?;
    world.frame_id = file_stem(&args.tensor);
    write_world(&world, &args.out)?;
    println!(
        "{} stixels ({} degenerate cells dropped)",
        summary.emitted, summary.dropped_degenerate
    );
    Ok(())
}

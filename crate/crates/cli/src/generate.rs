//! `stixel generate` — LiDAR ground-truth generation.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use stixel_core::eval::Box3D;
use stixel_core::gt::{generate_bbox_rule, generate_holistic, GenerationConfig, PointCloud};
use stixel_core::{CameraCalib, Result, StixelError};

use crate::io::{file_stem, write_world, GridArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Every non-ground return becomes an obstacle.
    Holistic,
    /// Only points inside annotated boxes, labeled per box.
    Bbox,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Point cloud: binary format, or CSV with a .csv extension.
    #[arg(long)]
    pub cloud: PathBuf,
    /// Camera calibration JSON.
    #[arg(long)]
    pub calib: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Box annotation JSON (required in bbox mode).
    #[arg(long)]
    pub boxes: Option<PathBuf>,
    /// Output world: .json for JSON, anything else for the wire format.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Stixel column width in pixels.
    #[arg(long, default_value_t = 8)]
    pub width_px: u16,
    /// Absolute depth gap that splits a column cluster, meters.
    #[arg(long, default_value_t = 2.0)]
    pub depth_gap_abs: f64,
    /// Relative depth gap as a fraction of the nearer depth.
    #[arg(long, default_value_t = 0.1)]
    pub depth_gap_rel: f64,
    /// Minimum LiDAR returns per stixel.
    #[arg(long, default_value_t = 3)]
    pub min_points: usize,
    /// Elevation above local ground that marks an obstacle, meters.
    #[arg(long, default_value_t = 0.3)]
    pub z_thresh: f64,
    /// Largest vertical pixel gap inside one stixel.
    #[arg(long, default_value_t = 12.0)]
    pub v_gap: f64,
    /// Ground elevation grid cell size, meters.
    #[arg(long, default_value_t = 2.0)]
    pub cell_size: f64,
}

pub fn run(args: &GenerateArgs) -> Result<()> {
    let calib = CameraCalib::load(&args.calib)?;
    let cloud = PointCloud::load(&args.cloud)?;
    let grid = args.grid.build()?;
    let config = GenerationConfig {
        stixel_width_px: args.width_px,
        depth_gap_abs: args.depth_gap_abs,
        depth_gap_rel: args.depth_gap_rel,
        min_points_per_stixel: args.min_points,
        z_gradient_thresh: args.z_thresh,
        v_gap_px: args.v_gap,
        ground_cell_size: args.cell_size,
    };

    let mut world = match args.mode {
        Mode::Holistic => generate_holistic(&cloud, &calib, &grid, &config)?,
        Mode::Bbox => {
            let boxes_path = args.boxes.as_ref().ok_or_else(|| {
                StixelError::Config("bbox mode needs --boxes with annotations".into())
            })?;
            let boxes = Box3D::load_list(boxes_path)?;
            generate_bbox_rule(&cloud, &boxes, &calib, &grid, &config)?
        }
    };
    world.frame_id = file_stem(&args.cloud);
    write_world(&world, &args.out)?;

    let columns: std::collections::HashSet<u16> =
        world.stixels.iter().map(|s| s.col).collect();
    println!(
        "{} stixels across {} columns ({} points in)",
        world.stixels.len(),
        columns.len(),
        cloud.len()
    );
    Ok(())
}

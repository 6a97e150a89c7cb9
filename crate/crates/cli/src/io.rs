//! Shared flag groups and file helpers for the subcommands.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use stixel_core::grid::DEFAULT_TANGENT_FACTOR;
use stixel_core::{wire, CameraCalib, DepthGrid, Result, StixelError, StixelWorld};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKindArg {
    Linear,
    Tangential,
}

/// Depth grid flags shared by the subcommands; defaults mirror the
/// library defaults (64 bins over 4..66 m).
#[derive(Debug, Args)]
pub struct GridArgs {
    /// Depth discretization layout.
    #[arg(long = "grid", value_enum, default_value = "linear")]
    pub kind: GridKindArg,
    /// Number of depth bins.
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Nearest representable depth in meters.
    #[arg(long, default_value_t = 4.0)]
    pub d_min: f64,
    /// Farthest representable depth in meters.
    #[arg(long, default_value_t = 66.0)]
    pub d_max: f64,
    /// Tangent limiting factor for the tangential layout.
    #[arg(long, default_value_t = DEFAULT_TANGENT_FACTOR)]
    pub tangent_a: f64,
}

impl GridArgs {
    pub fn build(&self) -> Result<DepthGrid> {
        match self.kind {
            GridKindArg::Linear => DepthGrid::linear(self.bins, self.d_min, self.d_max),
            GridKindArg::Tangential => {
                DepthGrid::tangential(self.bins, self.d_min, self.d_max, self.tangent_a)
            }
        }
    }
}

/// Write a world as JSON (`.json` extension) or the binary wire format
/// (anything else).
pub fn write_world(world: &StixelWorld, path: &Path) -> Result<()> {
    if has_ext(path, "json") {
        std::fs::write(path, wire::to_json(world)?)?;
    } else {
        std::fs::write(path, wire::encode(world)?)?;
    }
    Ok(())
}

/// Read a world from JSON (self-contained) or the wire format, which
/// needs the out-of-band calibration file.
pub fn read_world(path: &Path, calib_path: Option<&PathBuf>) -> Result<StixelWorld> {
    match wire::load_world(path)? {
        wire::WorldOnDisk::Json(world) => Ok(*world),
        wire::WorldOnDisk::Binary(frame) => {
            let calib_path = calib_path.ok_or_else(|| {
                StixelError::Config(
                    "binary world files need --calib for the camera parameters".into(),
                )
            })?;
            let calib = CameraCalib::load(calib_path)?;
            let frame_id = file_stem(path);
            frame.into_world(calib, frame_id)
        }
    }
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn has_ext(path: &Path, ext: &str) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

//! `stixel cluster` — DBSCAN grouping of a stored world.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use stixel_core::cluster::{cluster, ClusterFeature, ClusterParams};
use stixel_core::Result;

use crate::io::read_world;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureArg {
    /// Ground-plane footprint of each segment midpoint (lateral, depth).
    Footprint,
    /// Full 3D segment midpoint.
    Centroid,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    /// World file (.json, or binary with --calib).
    #[arg(long)]
    pub world: PathBuf,
    /// Camera calibration JSON, required for binary world files.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    /// Neighborhood radius in meters.
    #[arg(long, default_value_t = 1.5)]
    pub eps: f64,
    /// Minimum neighborhood size for a core point.
    #[arg(long, default_value_t = 3)]
    pub min_pts: usize,
    #[arg(long, value_enum, default_value = "footprint")]
    pub feature: FeatureArg,
    /// Cluster export path (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ClusterArgs) -> Result<()> {
    let params = ClusterParams {
        eps: args.eps,
        min_pts: args.min_pts,
        feature: match args.feature {
            FeatureArg::Footprint => ClusterFeature::FootprintXZ,
            FeatureArg::Centroid => ClusterFeature::Centroid3D,
        },
    };
    params.validate()?;
    let world = read_world(&args.world, args.calib.as_ref())?;
    let set = cluster(&world, &params)?;
    std::fs::write(&args.out, set.to_json()?)?;
    println!("{} clusters ({} noise)", set.clusters.len(), set.n_noise());
    Ok(())
}

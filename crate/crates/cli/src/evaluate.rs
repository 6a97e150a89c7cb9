//! `stixel evaluate` — precision/recall sweep over a directory of
//! prediction tensors and matching box annotations.
//!
//! Frames pair by file stem: `<stem>.snxt` in the prediction directory
//! must have `<stem>.json` in the annotation directory; with `--mask-dir`
//! a `<stem>.pgm` label mask joins the 2D track when present.

use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;
use stixel_core::eval::{ClassMap, EvalConfig, EvalFrame, FramePrediction, LabelMask, f1_sweep};
use stixel_core::eval::Box3D;
use stixel_core::tensor::PredictionTensor;
use stixel_core::{CameraCalib, Result, StixelError};

use crate::io::{file_stem, GridArgs};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of prediction tensors (*.snxt).
    #[arg(long)]
    pub pred_dir: PathBuf,
    /// Directory of box annotations (*.json).
    #[arg(long)]
    pub anno_dir: PathBuf,
    /// Camera calibration JSON (shared by all frames).
    #[arg(long)]
    pub calib: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Maximum box center range in meters.
    #[arg(long, default_value_t = 75.0)]
    pub max_range: f64,
    /// Horizontal field-of-view half-angle in degrees.
    #[arg(long, default_value_t = 25.2)]
    pub fov: f64,
    /// Minimum inside fraction for stixel approval.
    #[arg(long, default_value_t = 0.5)]
    pub inside_fraction: f64,
    /// Samples along each stixel segment for the inside test.
    #[arg(long, default_value_t = 11)]
    pub samples: usize,
    /// Comma-separated ascending probability thresholds.
    #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    pub thresholds: String,
    /// Directory of label masks (*.pgm) for the 2D track.
    #[arg(long)]
    pub mask_dir: Option<PathBuf>,
    /// Label vocabulary sidecar JSON for the masks.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Report output path (JSON).
    #[arg(long)]
    pub report: PathBuf,
    /// Optional PR-curve CSV output path.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Worker threads for frame loading and decoding.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub fn run(args: &EvaluateArgs) -> Result<()> {
    let calib = CameraCalib::load(&args.calib)?;
    let grid = args.grid.build()?;
    let thresholds = parse_thresholds(&args.thresholds)?;
    let config = EvalConfig {
        max_range_m: args.max_range,
        fov_deg: args.fov,
        inside_fraction: args.inside_fraction,
        height_samples: args.samples,
        thresholds,
    };
    config.validate()?;
    if args.jobs == 0 {
        return Err(StixelError::Config("--jobs must be at least 1".into()));
    }
    let classmap = match (&args.mask_dir, &args.labels) {
        (Some(_), Some(labels)) => Some(ClassMap::load_sidecar(labels)?),
        (Some(_), None) => {
            return Err(StixelError::Config(
                "--mask-dir needs --labels with the mask vocabulary".into(),
            ))
        }
        _ => None,
    };

    let mut tensor_paths: Vec<PathBuf> = std::fs::read_dir(&args.pred_dir)?
        .collect::<std::io::Result<Vec<_>>>()?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| crate::io::has_ext(p, "snxt"))
        .collect();
    tensor_paths.sort();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| StixelError::Config(format!("thread pool: {e}")))?;
    let frames: Vec<EvalFrame> = pool.install(|| {
        tensor_paths
            .par_iter()
            .map(|path| load_frame(path, args))
            .collect::<Result<Vec<_>>>()
    })?;

    let report = f1_sweep(&frames, &calib, &grid, &config, classmap.as_ref())?;
    std::fs::write(&args.report, report.to_json()?)?;
    if let Some(csv) = &args.csv {
        std::fs::write(csv, report.to_pr_csv())?;
    }
    println!("average F1: {:.4}", report.average_f1);
    Ok(())
}

fn load_frame(tensor_path: &Path, args: &EvaluateArgs) -> Result<EvalFrame> {
    let stem = file_stem(tensor_path);
    let anno = args.anno_dir.join(format!("{stem}.json"));
    if !anno.exists() {
        return Err(StixelError::Alignment(format!(
            "prediction {stem} has no annotation file {}",
            anno.display()
        )));
    }
    let boxes = Box3D::load_list(&anno)?;
    let tensor = PredictionTensor::load(tensor_path)?;
    let mask = match &args.mask_dir {
        Some(dir) => {
            let path = dir.join(format!("{stem}.pgm"));
            path.exists().then(|| LabelMask::load(&path)).transpose()?
        }
        None => None,
    };
    Ok(EvalFrame {
        frame_id: stem,
        prediction: FramePrediction::Tensor(tensor),
        boxes,
        mask,
    })
}

fn parse_thresholds(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| StixelError::Config(format!("bad threshold {t:?}")))
        })
        .collect()
}

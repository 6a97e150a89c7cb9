//! Evaluation of predicted stixel worlds against 3D box annotations and
//! segmentation masks.
//!
//! Two tracks mirror the two halves of the prediction task. The 3D track
//! scores geometry: a predicted stixel is approved when its 3D segment
//! lies mostly inside some relevant box, a relevant box is hit when some
//! stixel passes that same test against it, and precision/recall follow
//! from those counts. The 2D track scores shape coverage with the Jaccard
//! index on a downsampled grid (see [`seg`]).
//!
//! Boxes are expressed in the sensor frame: origin at the camera, x
//! forward, y left, z up. Relevance requires at least one LiDAR return in
//! the box, a center range within `max_range_m` and a center inside the
//! horizontal field-of-view cone about +x; sign-class boxes are never
//! evaluated.

mod boxes;
mod seg;

pub use boxes::Box3D;
pub use seg::{
    grid_iou, interest_grid, prediction_grid, seg_iou, ClassMap, CoverageGrid, EvalGroup,
    LabelMask, CYCLIST_LABELS, PEDESTRIAN_LABELS, VEHICLE_LABELS,
};

use serde::Serialize;

use crate::calib::CameraCalib;
use crate::error::{Result, StixelError};
use crate::grid::DepthGrid;
use crate::stixel::{stixel_to_segment3d, ObjectClass, Stixel, StixelWorld};
use crate::tensor::{decode, PredictionTensor};

/// Evaluation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    /// Boxes further than this from the camera are ignored, meters.
    pub max_range_m: f64,
    /// Horizontal field-of-view half-angle about +x, degrees.
    pub fov_deg: f64,
    /// Minimum fraction of a stixel's segment inside a box for approval.
    pub inside_fraction: f64,
    /// Sample count along a segment for the inside test.
    pub height_samples: usize,
    /// Probability thresholds of the F1 sweep, ascending.
    pub thresholds: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            max_range_m: 75.0,
            fov_deg: 25.2,
            inside_fraction: 0.5,
            height_samples: 11,
            thresholds: (1..=9).map(|i| i as f64 / 10.0).collect(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.inside_fraction > 0.0 && self.inside_fraction <= 1.0) {
            return Err(StixelError::Config(format!(
                "inside_fraction must lie in (0, 1], got {}",
                self.inside_fraction
            )));
        }
        if self.height_samples < 2 {
            return Err(StixelError::Config(format!(
                "height_samples must be at least 2, got {}",
                self.height_samples
            )));
        }
        if self.max_range_m.is_nan() || self.max_range_m <= 0.0 {
            return Err(StixelError::Config("max_range_m must be positive".into()));
        }
        if !(self.fov_deg > 0.0 && self.fov_deg <= 180.0) {
            return Err(StixelError::Config(format!(
                "fov_deg must lie in (0, 180], got {}",
                self.fov_deg
            )));
        }
        if self.thresholds.is_empty()
            || self.thresholds.windows(2).any(|w| w[0] >= w[1])
            || self.thresholds.iter().any(|t| !(0.0..=1.0).contains(t))
        {
            return Err(StixelError::Config(
                "thresholds must be strictly ascending within [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Box selection: at least one LiDAR return, center within range, center
/// inside the horizontal FoV cone, not a sign.
pub fn filter_relevant_boxes(boxes: &[Box3D], config: &EvalConfig) -> Vec<Box3D> {
    boxes
        .iter()
        .filter(|b| {
            b.class != ObjectClass::Sign
                && b.num_lidar_points >= 1
                && b.range() <= config.max_range_m
                && in_fov(b, config.fov_deg)
        })
        .cloned()
        .collect()
}

fn in_fov(b: &Box3D, fov_deg: f64) -> bool {
    b.cx > 0.0 && b.cy.abs().atan2(b.cx).to_degrees() <= fov_deg
}

/// Fraction of a stixel's 3D segment inside a box, estimated by sampling
/// `samples` equally spaced points from top to bottom (endpoints included).
pub fn stixel_inside_fraction(
    stixel: &Stixel,
    b: &Box3D,
    calib: &CameraCalib,
    samples: usize,
) -> Result<f64> {
    if samples < 2 {
        return Err(StixelError::Config(format!(
            "sample count must be at least 2, got {samples}"
        )));
    }
    let seg = stixel_to_segment3d(calib, stixel)
        .map_err(|e| StixelError::Geometry(format!("stixel segment: {e}")))?;
    let inside = (0..samples)
        .filter(|i| {
            let t = *i as f64 / (samples - 1) as f64;
            b.contains(&seg.point_at(t))
        })
        .count();
    Ok(inside as f64 / samples as f64)
}

/// Per-frame evaluation counts. Accumulation across frames is plain
/// addition, so reduction order never matters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct FrameCounts {
    pub approved: usize,
    pub predicted: usize,
    pub hit: usize,
    pub relevant: usize,
}

impl FrameCounts {
    pub fn add(&mut self, other: &FrameCounts) {
        self.approved += other.approved;
        self.predicted += other.predicted;
        self.hit += other.hit;
        self.relevant += other.relevant;
    }

    /// Approved over predicted; an empty prediction set is perfectly
    /// precise (this covers the doubly-empty scene rule).
    pub fn precision(&self) -> f64 {
        if self.predicted == 0 {
            1.0
        } else {
            self.approved as f64 / self.predicted as f64
        }
    }

    /// Hit over relevant; no relevant boxes means nothing was missed.
    pub fn recall(&self) -> f64 {
        if self.relevant == 0 {
            1.0
        } else {
            self.hit as f64 / self.relevant as f64
        }
    }
}

/// Harmonic mean of precision and recall, zero when both vanish.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Score one world against one frame's annotations.
///
/// A stixel is approved when its inside fraction against some relevant box
/// reaches `inside_fraction`; a relevant box is hit when some stixel
/// passes that same test against it.
pub fn precision_recall(
    world: &StixelWorld,
    boxes: &[Box3D],
    config: &EvalConfig,
) -> Result<(f64, f64, FrameCounts)> {
    config.validate()?;
    let relevant = filter_relevant_boxes(boxes, config);
    let mut counts = FrameCounts {
        predicted: world.stixels.len(),
        relevant: relevant.len(),
        ..Default::default()
    };
    let mut box_hit = vec![false; relevant.len()];
    for s in &world.stixels {
        let mut approved = false;
        for (bi, b) in relevant.iter().enumerate() {
            let frac = stixel_inside_fraction(s, b, &world.calib, config.height_samples)?;
            if frac >= config.inside_fraction {
                approved = true;
                box_hit[bi] = true;
            }
        }
        counts.approved += usize::from(approved);
    }
    counts.hit = box_hit.iter().filter(|h| **h).count();
    Ok((counts.precision(), counts.recall(), counts))
}

/// One frame of the sweep: either a raw tensor decoded per threshold, or
/// pre-decoded worlds aligned with the threshold list.
#[derive(Debug, Clone)]
pub enum FramePrediction {
    Tensor(PredictionTensor),
    Worlds(Vec<StixelWorld>),
}

#[derive(Debug, Clone)]
pub struct EvalFrame {
    pub frame_id: String,
    pub prediction: FramePrediction,
    pub boxes: Vec<Box3D>,
    /// Optional full-resolution label mask for the 2D track.
    pub mask: Option<LabelMask>,
}

/// Micro-averaged metrics at one threshold.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdMetrics {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: FrameCounts,
}

/// Mean of per-frame metrics at one threshold.
#[derive(Debug, Clone, Serialize)]
pub struct MacroMetrics {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameReport {
    pub frame_id: String,
    /// Counts per threshold, aligned with the config's threshold list.
    pub counts: Vec<FrameCounts>,
}

/// Full sweep output: micro metrics per threshold, their average F1,
/// macro (per-frame mean) metrics, per-frame counts and optionally the
/// mean segmentation IoU per threshold.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub thresholds: Vec<ThresholdMetrics>,
    pub average_f1: f64,
    pub macro_thresholds: Vec<MacroMetrics>,
    pub macro_average_f1: f64,
    pub frames: Vec<FrameReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seg_iou: Option<Vec<f64>>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| StixelError::Format(format!("report serialization failed: {e}")))
    }

    /// PR-curve rows: `threshold,precision,recall,f1`.
    pub fn to_pr_csv(&self) -> String {
        let mut out = String::from("threshold,precision,recall,f1\n");
        for t in &self.thresholds {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t.threshold, t.precision, t.recall, t.f1
            ));
        }
        out
    }
}

/// Evaluate a set of frames across the config's threshold list.
///
/// Counts are pooled over frames per threshold (micro averaging) and the
/// headline score is the mean F1 across thresholds; per-frame macro means
/// are reported alongside. Frames providing pre-decoded worlds must supply
/// exactly one world per threshold.
pub fn f1_sweep(
    frames: &[EvalFrame],
    calib: &CameraCalib,
    grid: &DepthGrid,
    config: &EvalConfig,
    classmap: Option<&ClassMap>,
) -> Result<EvalReport> {
    config.validate()?;
    let n_thresh = config.thresholds.len();
    let mut micro = vec![FrameCounts::default(); n_thresh];
    let mut macro_p = vec![0.0f64; n_thresh];
    let mut macro_r = vec![0.0f64; n_thresh];
    let mut macro_f1 = vec![0.0f64; n_thresh];
    let mut iou_sum = vec![0.0f64; n_thresh];
    let mut iou_frames = 0usize;
    let mut frame_reports = Vec::with_capacity(frames.len());

    for frame in frames {
        let worlds: Vec<StixelWorld> = match &frame.prediction {
            FramePrediction::Tensor(t) => config
                .thresholds
                .iter()
                .map(|th| decode(t, calib, grid, *th).map(|(w, _)| w))
                .collect::<Result<_>>()?,
            FramePrediction::Worlds(w) => {
                if w.len() != n_thresh {
                    return Err(StixelError::Alignment(format!(
                        "frame {}: {} worlds supplied for {} thresholds",
                        frame.frame_id,
                        w.len(),
                        n_thresh
                    )));
                }
                w.clone()
            }
        };

        let mut per_frame = Vec::with_capacity(n_thresh);
        for (ti, world) in worlds.iter().enumerate() {
            let (p, r, counts) = precision_recall(world, &frame.boxes, config)?;
            micro[ti].add(&counts);
            macro_p[ti] += p;
            macro_r[ti] += r;
            macro_f1[ti] += f1_score(p, r);
            per_frame.push(counts);
        }
        if let (Some(mask), Some(map)) = (&frame.mask, classmap) {
            for (ti, world) in worlds.iter().enumerate() {
                iou_sum[ti] += seg_iou(world, mask, map)?;
            }
            iou_frames += 1;
        }
        frame_reports.push(FrameReport {
            frame_id: frame.frame_id.clone(),
            counts: per_frame,
        });
    }

    let n_frames = frames.len().max(1) as f64;
    let thresholds: Vec<ThresholdMetrics> = config
        .thresholds
        .iter()
        .zip(&micro)
        .map(|(th, counts)| {
            let p = counts.precision();
            let r = counts.recall();
            ThresholdMetrics {
                threshold: *th,
                precision: p,
                recall: r,
                f1: f1_score(p, r),
                counts: *counts,
            }
        })
        .collect();
    let average_f1 = thresholds.iter().map(|t| t.f1).sum::<f64>() / n_thresh as f64;
    let macro_thresholds: Vec<MacroMetrics> = config
        .thresholds
        .iter()
        .enumerate()
        .map(|(ti, th)| MacroMetrics {
            threshold: *th,
            precision: macro_p[ti] / n_frames,
            recall: macro_r[ti] / n_frames,
            f1: macro_f1[ti] / n_frames,
        })
        .collect();
    let macro_average_f1 =
        macro_thresholds.iter().map(|t| t.f1).sum::<f64>() / n_thresh as f64;
    let seg_iou = (iou_frames > 0).then(|| {
        iou_sum
            .iter()
            .map(|s| s / iou_frames as f64)
            .collect::<Vec<f64>>()
    });

    Ok(EvalReport {
        thresholds,
        average_f1,
        macro_thresholds,
        macro_average_f1,
        frames: frame_reports,
        seg_iou,
    })
}

//! Automatic stixel ground-truth generation from LiDAR point clouds.
//!
//! Two rules are implemented. The holistic rule marks every return that
//! ground segmentation rejects as an obstacle, projects those returns into
//! the image, bins them into stixel columns and cuts each column into
//! depth-coherent clusters. The bounding-box rule instead keeps only points
//! inside annotated 3D boxes and runs the same per-column cutting once per
//! box, so touching objects never merge and every stick inherits its box's
//! class.
//!
//! Both rules capture only the visible parts of an object: clusters span
//! exactly the rows their LiDAR returns cover and are never extrapolated
//! down to the ground.

mod cloud;
mod ground;

pub use cloud::{PointCloud, CLOUD_MAGIC};
pub use ground::{segment_ground, GridGroundSegmenter, GroundModel, GroundSegmenter};

use crate::calib::{project_point, CameraCalib};
use crate::error::Result;
use crate::eval::Box3D;
use crate::grid::DepthGrid;
use crate::stixel::{Stixel, StixelWorld, DEFAULT_STIXEL_WIDTH};

/// Tunable thresholds of the generation pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    /// Horizontal width of one stixel column in pixels.
    pub stixel_width_px: u16,
    /// Absolute depth gap that always splits a column cluster, meters.
    pub depth_gap_abs: f64,
    /// Relative depth gap: consecutive returns further apart than this
    /// fraction of the nearer depth split the cluster.
    pub depth_gap_rel: f64,
    /// Clusters below this size are discarded as noise.
    pub min_points_per_stixel: usize,
    /// Elevation above the local ground that makes a point an obstacle,
    /// meters.
    pub z_gradient_thresh: f64,
    /// Largest vertical pixel gap tolerated inside one stixel.
    pub v_gap_px: f64,
    /// Cell edge length of the ground elevation grid, meters.
    pub ground_cell_size: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            stixel_width_px: DEFAULT_STIXEL_WIDTH,
            depth_gap_abs: 2.0,
            depth_gap_rel: 0.1,
            min_points_per_stixel: 3,
            z_gradient_thresh: 0.3,
            v_gap_px: 12.0,
            ground_cell_size: 2.0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("depth_gap_abs", self.depth_gap_abs),
            ("depth_gap_rel", self.depth_gap_rel),
            ("z_gradient_thresh", self.z_gradient_thresh),
            ("v_gap_px", self.v_gap_px),
            ("ground_cell_size", self.ground_cell_size),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(crate::error::StixelError::Config(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.stixel_width_px == 0 {
            return Err(crate::error::StixelError::Config(
                "stixel_width_px must be positive".into(),
            ));
        }
        if self.min_points_per_stixel == 0 {
            return Err(crate::error::StixelError::Config(
                "min_points_per_stixel must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A projected LiDAR return inside one stixel column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnPoint {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

/// Cut one column's projected returns into stixels.
///
/// Points are first ordered by depth and split wherever the gap between
/// consecutive depths exceeds `max(depth_gap_abs, depth_gap_rel · w)`;
/// each depth cluster is then ordered by row and split at vertical gaps
/// beyond `v_gap_px`. Surviving clusters of at least
/// `min_points_per_stixel` points become stixels spanning their row range,
/// at the median depth, with probability 1.
pub fn cut_column_stixels(
    col: u16,
    points: &[ColumnPoint],
    img_height: u32,
    config: &GenerationConfig,
) -> Vec<Stixel> {
    let mut by_depth: Vec<ColumnPoint> = points.to_vec();
    by_depth.sort_by(|a, b| a.w.total_cmp(&b.w));

    let mut stixels = Vec::new();
    let mut depth_cluster: Vec<ColumnPoint> = Vec::new();
    for p in by_depth {
        if let Some(prev) = depth_cluster.last() {
            let gap = p.w - prev.w;
            if gap > config.depth_gap_abs.max(config.depth_gap_rel * prev.w) {
                cut_by_rows(col, &depth_cluster, img_height, config, &mut stixels);
                depth_cluster.clear();
            }
        }
        depth_cluster.push(p);
    }
    cut_by_rows(col, &depth_cluster, img_height, config, &mut stixels);
    stixels
}

fn cut_by_rows(
    col: u16,
    cluster: &[ColumnPoint],
    img_height: u32,
    config: &GenerationConfig,
    out: &mut Vec<Stixel>,
) {
    if cluster.is_empty() {
        return;
    }
    let mut by_row: Vec<ColumnPoint> = cluster.to_vec();
    by_row.sort_by(|a, b| a.v.total_cmp(&b.v));

    let mut start = 0;
    for i in 1..=by_row.len() {
        let split = i == by_row.len() || by_row[i].v - by_row[i - 1].v > config.v_gap_px;
        if split {
            emit_stixel(col, &by_row[start..i], img_height, config, out);
            start = i;
        }
    }
}

fn emit_stixel(
    col: u16,
    cluster: &[ColumnPoint],
    img_height: u32,
    config: &GenerationConfig,
    out: &mut Vec<Stixel>,
) {
    if cluster.len() < config.min_points_per_stixel {
        return;
    }
    let v_min = cluster.iter().map(|p| p.v).fold(f64::INFINITY, f64::min);
    let v_max = cluster.iter().map(|p| p.v).fold(f64::NEG_INFINITY, f64::max);
    let mut v_top = (v_min.floor().max(0.0)) as u32;
    let mut v_bot = (v_max.ceil() as u32).min(img_height);
    if v_top >= v_bot {
        // Perfectly flat cluster on an integer row: give it one pixel.
        if v_bot < img_height {
            v_bot += 1;
        } else {
            v_top -= 1;
        }
    }
    let mut depths: Vec<f64> = cluster.iter().map(|p| p.w).collect();
    depths.sort_unstable_by(f64::total_cmp);
    let depth = median_of_sorted(&depths);
    let mut s = Stixel::new(col, v_top as u16, v_bot as u16, depth, 1.0);
    s.width_px = config.stixel_width_px;
    out.push(s);
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Project obstacle points into the image and group them by stixel column.
/// Points behind the camera, outside the image bounds or outside the
/// grid's depth range are discarded.
fn bin_into_columns(
    points: impl Iterator<Item = nalgebra::Vector3<f64>>,
    calib: &CameraCalib,
    grid: &DepthGrid,
    width_px: u16,
) -> Vec<Vec<ColumnPoint>> {
    let n_cols = calib.n_columns(width_px) as usize;
    let mut columns: Vec<Vec<ColumnPoint>> = vec![Vec::new(); n_cols];
    for p in points {
        let Ok((u, v, w)) = project_point(calib, &p) else {
            continue;
        };
        if u < 0.0 || u >= f64::from(calib.img_width) || v < 0.0 || v >= f64::from(calib.img_height)
        {
            continue;
        }
        if w < grid.d_min() || w > grid.d_max() {
            continue;
        }
        let col = (u / f64::from(width_px)).floor() as usize;
        columns[col].push(ColumnPoint { u, v, w });
    }
    columns
}

fn cut_all_columns(
    columns: &[Vec<ColumnPoint>],
    calib: &CameraCalib,
    config: &GenerationConfig,
) -> Vec<Stixel> {
    let mut stixels = Vec::new();
    for (col, pts) in columns.iter().enumerate() {
        if !pts.is_empty() {
            stixels.extend(cut_column_stixels(
                col as u16,
                pts,
                calib.img_height,
                config,
            ));
        }
    }
    stixels
}

/// Generate ground truth under the holistic rule: everything that ground
/// segmentation rejects is an obstacle, whatever its class.
pub fn generate_holistic(
    cloud: &PointCloud,
    calib: &CameraCalib,
    grid: &DepthGrid,
    config: &GenerationConfig,
) -> Result<StixelWorld> {
    config.validate()?;
    let mut world = StixelWorld::new(calib.clone(), grid.clone(), "");
    if cloud.is_empty() {
        return Ok(world);
    }
    let model = GridGroundSegmenter {
        cell_size: config.ground_cell_size,
        z_threshold: config.z_gradient_thresh,
        ..Default::default()
    }
    .segment(cloud);
    let outliers = cloud
        .points()
        .iter()
        .zip(&model.inlier_mask)
        .filter(|(_, ground)| !**ground)
        .map(|(p, _)| *p);
    let columns = bin_into_columns(outliers, calib, grid, config.stixel_width_px);
    world.stixels = cut_all_columns(&columns, calib, config);
    Ok(world)
}

/// Generate ground truth from annotated 3D boxes: only points inside a box
/// participate, the column pipeline runs once per box, and every stixel
/// carries its box's class label.
pub fn generate_bbox_rule(
    cloud: &PointCloud,
    boxes: &[Box3D],
    calib: &CameraCalib,
    grid: &DepthGrid,
    config: &GenerationConfig,
) -> Result<StixelWorld> {
    config.validate()?;
    let mut world = StixelWorld::new(calib.clone(), grid.clone(), "");
    for b in boxes {
        let members = cloud.points().iter().filter(|p| b.contains(p)).copied();
        let columns = bin_into_columns(members, calib, grid, config.stixel_width_px);
        world.stixels.extend(
            cut_all_columns(&columns, calib, config)
                .into_iter()
                .map(|s| s.with_label(b.class)),
        );
    }
    Ok(world)
}

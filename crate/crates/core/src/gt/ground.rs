//! Ground segmentation over a horizontal cell grid.
//!
//! A deliberately simple elevation model: points are binned into square
//! cells in the (x, y) plane, each cell's ground level is a low percentile
//! of its height distribution, and a point counts as ground when it rises
//! no more than a threshold above that level. Per-cell floors let the model
//! track sloped terrain that a single global plane would misclassify.

use std::collections::HashMap;

use super::cloud::PointCloud;

/// Result of ground segmentation: a per-point inlier mask plus the cell
/// grid of estimated ground heights.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundModel {
    pub inlier_mask: Vec<bool>,
    pub cell_size: f64,
    cells: HashMap<(i64, i64), f64>,
}

impl GroundModel {
    pub fn empty(cell_size: f64) -> Self {
        Self {
            inlier_mask: Vec::new(),
            cell_size,
            cells: HashMap::new(),
        }
    }

    /// Estimated ground height of the cell containing `(x, y)`, if any
    /// point fell into it.
    pub fn ground_height_at(&self, x: f64, y: f64) -> Option<f64> {
        self.cells.get(&cell_index(x, y, self.cell_size)).copied()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }
}

/// Strategy interface so the cell-grid model can be swapped for a more
/// elaborate segmenter without touching the generation pipeline.
pub trait GroundSegmenter {
    fn segment(&self, cloud: &PointCloud) -> GroundModel;
}

/// The default cell-grid elevation segmenter.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGroundSegmenter {
    /// Horizontal cell edge length in meters.
    pub cell_size: f64,
    /// Points at most this far above the cell floor are ground.
    pub z_threshold: f64,
    /// Percentile of cell heights taken as the floor, in [0, 1].
    pub ground_percentile: f64,
}

impl Default for GridGroundSegmenter {
    fn default() -> Self {
        Self {
            cell_size: 2.0,
            z_threshold: 0.3,
            ground_percentile: 0.05,
        }
    }
}

impl GroundSegmenter for GridGroundSegmenter {
    fn segment(&self, cloud: &PointCloud) -> GroundModel {
        if cloud.is_empty() {
            return GroundModel::empty(self.cell_size);
        }
        let mut heights: HashMap<(i64, i64), Vec<f64>> = HashMap::new();
        for p in cloud.points() {
            heights
                .entry(cell_index(p.x, p.y, self.cell_size))
                .or_default()
                .push(p.z);
        }
        let mut cells = HashMap::with_capacity(heights.len());
        for (idx, mut zs) in heights {
            zs.sort_unstable_by(f64::total_cmp);
            cells.insert(idx, zs[percentile_rank(zs.len(), self.ground_percentile)]);
        }
        let inlier_mask = cloud
            .points()
            .iter()
            .map(|p| {
                let floor = cells[&cell_index(p.x, p.y, self.cell_size)];
                p.z - floor <= self.z_threshold
            })
            .collect();
        GroundModel {
            inlier_mask,
            cell_size: self.cell_size,
            cells,
        }
    }
}

/// Segment `cloud` with the cell-grid model at the given cell size and
/// elevation threshold.
pub fn segment_ground(cloud: &PointCloud, cell_size: f64, z_threshold: f64) -> GroundModel {
    GridGroundSegmenter {
        cell_size,
        z_threshold,
        ..Default::default()
    }
    .segment(cloud)
}

fn cell_index(x: f64, y: f64, cell_size: f64) -> (i64, i64) {
    ((x / cell_size).floor() as i64, (y / cell_size).floor() as i64)
}

/// Nearest-rank index of percentile `p` among `n` sorted values.
fn percentile_rank(n: usize, p: f64) -> usize {
    ((p * n as f64).ceil() as usize)
        .saturating_sub(1)
        .min(n - 1)
}

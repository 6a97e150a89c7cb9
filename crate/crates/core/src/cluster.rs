//! DBSCAN grouping of stixels into object clusters.
//!
//! Each stixel contributes one feature point: by default the ground-plane
//! footprint of its 3D segment midpoint, taken in the camera frame as
//! (lateral offset, depth) so the choice of world frame cannot tilt the
//! plane; alternatively the full 3D midpoint. Classic density clustering
//! follows: a point is a core point when at least `min_pts` points
//! (itself included) lie within `eps`, clusters are the connected
//! components of core points under the eps-relation, and non-core points
//! within eps of a core attach as border points.
//!
//! Determinism: cluster ids are assigned by scanning points in
//! lexicographic feature order, and border points attach to the lowest
//! cluster id among their core neighbors. Both rules depend only on
//! coordinates, so shuffling the input permutes nothing but storage order.
//!
//! Neighborhoods come from a uniform grid hash with cell edge `eps`;
//! checking the surrounding 3x3x3 cell block finds every point within
//! `eps` exactly.

use serde::Serialize;

use crate::error::{Result, StixelError};
use crate::stixel::{stixel_to_segment3d, StixelWorld};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterFeature {
    /// Ground-plane footprint of the segment midpoint: (lateral, depth).
    FootprintXZ,
    /// Full 3D segment midpoint in the camera frame.
    Centroid3D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    /// Neighborhood radius in meters.
    pub eps: f64,
    /// Minimum neighborhood size (the point itself counts) for a core point.
    pub min_pts: usize,
    pub feature: ClusterFeature,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            eps: 1.5,
            min_pts: 3,
            feature: ClusterFeature::FootprintXZ,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if !self.eps.is_finite() || self.eps <= 0.0 {
            return Err(StixelError::Config(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if self.min_pts == 0 {
            return Err(StixelError::Config("min_pts must be at least 1".into()));
        }
        Ok(())
    }
}

/// One cluster: member stixel indices plus derived aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterInfo {
    pub members: Vec<usize>,
    /// Axis-aligned world-frame extent over member segment endpoints.
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub mean_depth: f64,
    pub mean_prob: f64,
}

/// Clustering result: per-stixel assignment (`None` marks noise) and the
/// cluster list ordered by id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSet {
    pub assignment: Vec<Option<usize>>,
    pub clusters: Vec<ClusterInfo>,
}

impl ClusterSet {
    pub fn n_noise(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_none()).count()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| StixelError::Format(format!("cluster serialization failed: {e}")))
    }
}

/// Per-cluster extent record, the flat export shape.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterExtent {
    pub cluster_id: usize,
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub count: usize,
    pub mean_prob: f64,
}

/// Group a world's stixels with DBSCAN over the configured feature.
pub fn cluster(world: &StixelWorld, params: &ClusterParams) -> Result<ClusterSet> {
    params.validate()?;
    let n = world.stixels.len();
    let mut features = Vec::with_capacity(n);
    let mut endpoints = Vec::with_capacity(n);
    for s in &world.stixels {
        let seg = stixel_to_segment3d(&world.calib, s)
            .map_err(|e| StixelError::Geometry(format!("stixel segment: {e}")))?;
        let mid_cam = world.calib.world_to_camera(&seg.midpoint());
        features.push(match params.feature {
            ClusterFeature::FootprintXZ => [mid_cam.x, mid_cam.z, 0.0],
            ClusterFeature::Centroid3D => [mid_cam.x, mid_cam.y, mid_cam.z],
        });
        endpoints.push(seg);
    }

    let assignment = dbscan(&features, params.eps, params.min_pts);
    let n_clusters = assignment.iter().flatten().max().map_or(0, |m| m + 1);
    let mut clusters: Vec<ClusterInfo> = (0..n_clusters)
        .map(|_| ClusterInfo {
            members: Vec::new(),
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
            mean_depth: 0.0,
            mean_prob: 0.0,
        })
        .collect();
    for (i, assigned) in assignment.iter().enumerate() {
        let Some(id) = assigned else { continue };
        let info = &mut clusters[*id];
        info.members.push(i);
        for p in [&endpoints[i].top, &endpoints[i].bot] {
            for (axis, v) in [p.x, p.y, p.z].into_iter().enumerate() {
                info.min[axis] = info.min[axis].min(v);
                info.max[axis] = info.max[axis].max(v);
            }
        }
        info.mean_depth += world.stixels[i].depth;
        info.mean_prob += world.stixels[i].prob;
    }
    for info in &mut clusters {
        let k = info.members.len() as f64;
        info.mean_depth /= k;
        info.mean_prob /= k;
    }
    Ok(ClusterSet {
        assignment,
        clusters,
    })
}

/// Flatten a cluster set into extent records.
pub fn cluster_extents(set: &ClusterSet) -> Vec<ClusterExtent> {
    set.clusters
        .iter()
        .enumerate()
        .map(|(id, c)| ClusterExtent {
            cluster_id: id,
            min: c.min,
            max: c.max,
            count: c.members.len(),
            mean_prob: c.mean_prob,
        })
        .collect()
}

fn cell_of(p: &[f64; 3], eps: f64) -> (i64, i64, i64) {
    (
        (p[0] / eps).floor() as i64,
        (p[1] / eps).floor() as i64,
        (p[2] / eps).floor() as i64,
    )
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn dbscan(points: &[[f64; 3]], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let mut grid: std::collections::HashMap<(i64, i64, i64), Vec<usize>> =
        std::collections::HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(cell_of(p, eps)).or_default().push(i);
    }
    let eps2 = eps * eps;
    let neighbors = |i: usize| -> Vec<usize> {
        let (cx, cy, cz) = cell_of(&points[i], eps);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(cell) = grid.get(&(cx + dx, cy + dy, cz + dz)) {
                        out.extend(
                            cell.iter()
                                .copied()
                                .filter(|j| dist2(&points[i], &points[*j]) <= eps2),
                        );
                    }
                }
            }
        }
        out
    };

    let core: Vec<bool> = (0..n).map(|i| neighbors(i).len() >= min_pts).collect();

    // Canonical scan order: lexicographic by coordinates, so cluster ids
    // do not depend on input order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| {
        points[*a]
            .iter()
            .zip(&points[*b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut next_id = 0;
    for &seed in &order {
        if !core[seed] || assignment[seed].is_some() {
            continue;
        }
        let id = next_id;
        next_id += 1;
        let mut queue = vec![seed];
        assignment[seed] = Some(id);
        while let Some(i) = queue.pop() {
            for j in neighbors(i) {
                if core[j] && assignment[j].is_none() {
                    assignment[j] = Some(id);
                    queue.push(j);
                }
            }
        }
    }

    // Border points: lowest cluster id among core neighbors.
    for i in 0..n {
        if core[i] || assignment[i].is_some() {
            continue;
        }
        assignment[i] = neighbors(i)
            .into_iter()
            .filter(|j| core[*j])
            .filter_map(|j| assignment[j])
            .min();
    }
    assignment
}

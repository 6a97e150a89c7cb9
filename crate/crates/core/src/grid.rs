//! Depth discretization: mapping between bin indices and metric depths.
//!
//! Two layouts are supported. The linear grid places anchors at the lower
//! edge of equally sized bins, `anchors[i] = d_min + i·(d_max−d_min)/n`. The
//! tangential grid concentrates anchors near the camera,
//!
//! ```text
//! D(i) = d_min + tan(i/(n−1) · π/a) / tan(π/a) · (d_max − d_min)
//! ```
//!
//! where `a > 2` limits the tangent argument to below π/2. Both endpoints
//! are hit exactly by the tangential layout; the linear layout tops out one
//! step below `d_max`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StixelError};

pub const DEFAULT_N_BINS: usize = 64;
pub const DEFAULT_D_MIN: f64 = 4.0;
pub const DEFAULT_D_MAX: f64 = 66.0;

/// Frozen tangent limiting factor for the default grid: with 64 bins over
/// [4, 66] it places exactly 43 anchors at or below 30 m. Chosen inside the
/// interval of factors satisfying that count (roughly 2.630 to 2.686) so
/// the property is robust to rounding.
pub const DEFAULT_TANGENT_FACTOR: f64 = 2.65;

/// Lower bound (exclusive) of the valid tangent factor domain.
pub const TANGENT_FACTOR_MIN: f64 = 2.0;
/// Upper bound (inclusive) of the calibration search interval.
pub const TANGENT_FACTOR_MAX: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Linear,
    Tangential,
}

/// An ascending list of metric depth anchors plus the parameters that
/// produced it. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthGrid {
    kind: GridKind,
    n_bins: usize,
    d_min: f64,
    d_max: f64,
    tangent_factor: Option<f64>,
    anchors: Vec<f64>,
}

impl DepthGrid {
    /// Equidistant anchors at the lower edges of `n_bins` bins over
    /// `[d_min, d_max]`.
    pub fn linear(n_bins: usize, d_min: f64, d_max: f64) -> Result<Self> {
        check_range(n_bins, d_min, d_max)?;
        let step = (d_max - d_min) / n_bins as f64;
        let anchors = (0..n_bins).map(|i| d_min + i as f64 * step).collect();
        Ok(Self {
            kind: GridKind::Linear,
            n_bins,
            d_min,
            d_max,
            tangent_factor: None,
            anchors,
        })
    }

    /// Tangentially spaced anchors: small steps near `d_min`, growing
    /// toward `d_max`. Requires `a > 2` to keep the tangent argument below
    /// its singularity.
    pub fn tangential(n_bins: usize, d_min: f64, d_max: f64, a: f64) -> Result<Self> {
        check_range(n_bins, d_min, d_max)?;
        if !a.is_finite() || a <= TANGENT_FACTOR_MIN {
            return Err(StixelError::Range(format!(
                "tangent limiting factor must exceed {TANGENT_FACTOR_MIN}, got {a}"
            )));
        }
        let anchors = tangential_anchors(n_bins, d_min, d_max, a);
        Ok(Self {
            kind: GridKind::Tangential,
            n_bins,
            d_min,
            d_max,
            tangent_factor: Some(a),
            anchors,
        })
    }

    /// The 64-bin linear grid over [4, 66] m (0.96875 m steps).
    pub fn default_linear() -> Self {
        Self::linear(DEFAULT_N_BINS, DEFAULT_D_MIN, DEFAULT_D_MAX).expect("default grid is valid")
    }

    /// The 64-bin tangential grid over [4, 66] m with the frozen factor.
    pub fn default_tangential() -> Self {
        Self::tangential(DEFAULT_N_BINS, DEFAULT_D_MIN, DEFAULT_D_MAX, DEFAULT_TANGENT_FACTOR)
            .expect("default grid is valid")
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn d_min(&self) -> f64 {
        self.d_min
    }

    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn tangent_factor(&self) -> Option<f64> {
        self.tangent_factor
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    /// Index of the nearest anchor not exceeding `depth` (floor convention).
    pub fn depth_to_bin(&self, depth: f64) -> Result<usize> {
        if !(depth >= self.d_min && depth <= self.d_max) {
            return Err(StixelError::Range(format!(
                "depth {depth} outside [{}, {}]",
                self.d_min, self.d_max
            )));
        }
        let above = self.anchors.partition_point(|a| *a <= depth);
        Ok(above - 1)
    }

    /// Metric depth of anchor `bin`.
    pub fn bin_to_depth(&self, bin: usize) -> Result<f64> {
        self.anchors.get(bin).copied().ok_or_else(|| {
            StixelError::Range(format!(
                "bin {bin} outside [0, {})",
                self.n_bins
            ))
        })
    }
}

fn check_range(n_bins: usize, d_min: f64, d_max: f64) -> Result<()> {
    if n_bins < 2 {
        return Err(StixelError::Config(format!(
            "depth grid needs at least 2 bins, got {n_bins}"
        )));
    }
    if !(d_min >= 0.0 && d_min < d_max) || !d_min.is_finite() || !d_max.is_finite() {
        return Err(StixelError::Config(format!(
            "invalid depth range [{d_min}, {d_max}]"
        )));
    }
    Ok(())
}

fn tangential_anchors(n_bins: usize, d_min: f64, d_max: f64, a: f64) -> Vec<f64> {
    let denom = (std::f64::consts::PI / a).tan();
    (0..n_bins)
        .map(|i| {
            let frac = i as f64 / (n_bins - 1) as f64;
            d_min + (frac * std::f64::consts::PI / a).tan() / denom * (d_max - d_min)
        })
        .collect()
}

fn count_at_or_below(n_bins: usize, d_min: f64, d_max: f64, a: f64, target_depth: f64) -> usize {
    tangential_anchors(n_bins, d_min, d_max, a)
        .iter()
        .filter(|d| **d <= target_depth)
        .count()
}

/// Find the smallest tangent factor in (2, 64] for which exactly
/// `target_count` anchors land at or below `target_depth`.
///
/// The count is non-increasing in the factor (larger factors flatten the
/// layout toward linear), so bisection on the count applies.
pub fn calibrate_tangential_a(
    n_bins: usize,
    d_min: f64,
    d_max: f64,
    target_count: usize,
    target_depth: f64,
) -> Result<f64> {
    check_range(n_bins, d_min, d_max)?;
    if target_count == 0 || target_count >= n_bins {
        return Err(StixelError::Calibration(format!(
            "target count must lie strictly between 0 and {n_bins}, got {target_count}"
        )));
    }
    if !(target_depth > d_min && target_depth < d_max) {
        return Err(StixelError::Calibration(format!(
            "target depth must lie strictly inside [{d_min}, {d_max}], got {target_depth}"
        )));
    }

    let count = |a: f64| count_at_or_below(n_bins, d_min, d_max, a, target_depth);
    let near_singularity = TANGENT_FACTOR_MIN + 1e-9;
    let count_lo = count(near_singularity);
    let count_hi = count(TANGENT_FACTOR_MAX);
    if target_count > count_lo || target_count < count_hi {
        return Err(StixelError::Calibration(format!(
            "no factor in ({TANGENT_FACTOR_MIN}, {TANGENT_FACTOR_MAX}] yields {target_count} \
             anchors at or below {target_depth} m; achievable counts range from {count_hi} \
             (a = {TANGENT_FACTOR_MAX}) to {count_lo} (a near {TANGENT_FACTOR_MIN})"
        )));
    }

    // Smallest a with count(a) <= target_count; a tight recount guards
    // against the count skipping the target entirely.
    let mut lo = TANGENT_FACTOR_MIN;
    let mut hi = TANGENT_FACTOR_MAX;
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if count(mid) <= target_count {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if count(hi) != target_count {
        return Err(StixelError::Calibration(format!(
            "count function jumps past {target_count} (reached {} at a = {hi:.9}); \
             achievable counts range from {count_hi} to {count_lo}",
            count(hi)
        )));
    }
    Ok(hi)
}

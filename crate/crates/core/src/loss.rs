//! Reference loss functions as pure scalar math.
//!
//! These are verification targets, not training machinery: anyone wiring
//! the toolkit's ground truth into a training stack can check their
//! framework's losses against these implementations. The depth-weighted
//! binary cross-entropy multiplies each element's cross-entropy by a
//! factor growing linearly from `alpha_min` at `d_min` to `alpha_max` at
//! `d_max`, boosting the contribution of distant cells.

use crate::error::{Result, StixelError};
use crate::grid::DepthGrid;
use crate::tensor::{PredictionTensor, Property};

/// Probabilities are clamped to `[EPS, 1 - EPS]` before taking logarithms.
pub const PROB_EPS: f64 = 1e-7;

/// Term weights for the combined loss plus the depth-weighting range.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWeights {
    /// Weight of the top-row regression term.
    pub alpha: f64,
    /// Weight of the bottom-row regression term.
    pub beta: f64,
    /// Weight of the classification term.
    pub gamma: f64,
    /// Depth weight at `d_min`.
    pub alpha_min: f64,
    /// Depth weight at `d_max`.
    pub alpha_max: f64,
    pub d_min: f64,
    pub d_max: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
            alpha_min: 1.0,
            alpha_max: 2.0,
            d_min: 4.0,
            d_max: 66.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 || self.beta < 0.0 || self.gamma < 0.0 {
            return Err(StixelError::Config(
                "term weights must be non-negative".into(),
            ));
        }
        if self.alpha_min > self.alpha_max {
            return Err(StixelError::Config(format!(
                "alpha_min {} exceeds alpha_max {}",
                self.alpha_min, self.alpha_max
            )));
        }
        if self.d_min.is_nan() || self.d_max.is_nan() || self.d_min >= self.d_max {
            return Err(StixelError::Config(format!(
                "invalid depth range [{}, {}]",
                self.d_min, self.d_max
            )));
        }
        Ok(())
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(StixelError::Shape(format!(
            "length mismatch: {a} vs {b}"
        )));
    }
    if a == 0 {
        return Err(StixelError::Shape("inputs must not be empty".into()));
    }
    Ok(())
}

/// Mean squared error.
pub fn mse(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), target.len())?;
    let sum: f64 = pred
        .iter()
        .zip(target)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / pred.len() as f64)
}

fn cross_entropy(p: f64, t: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
}

fn check_target(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(StixelError::Range(format!(
            "target value {t} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Binary cross-entropy with probability clamping.
pub fn bce(pred: &[f64], target: &[f64]) -> Result<f64> {
    check_lengths(pred.len(), target.len())?;
    let mut sum = 0.0;
    for (p, t) in pred.iter().zip(target) {
        check_target(*t)?;
        sum += cross_entropy(*p, *t);
    }
    Ok(sum / pred.len() as f64)
}

/// The linear depth multiplier: `alpha_min` at `d_min`, `alpha_max` at
/// `d_max`.
pub fn depth_weight(d: f64, weights: &LossWeights) -> Result<f64> {
    weights.validate()?;
    if !(d >= weights.d_min && d <= weights.d_max) {
        return Err(StixelError::Range(format!(
            "depth {d} outside [{}, {}]",
            weights.d_min, weights.d_max
        )));
    }
    Ok(weights.alpha_min
        + (d - weights.d_min) / (weights.d_max - weights.d_min)
            * (weights.alpha_max - weights.alpha_min))
}

/// Depth-weighted binary cross-entropy: each element's cross-entropy is
/// scaled by [`depth_weight`] of its depth before averaging.
pub fn wbce(pred: &[f64], target: &[f64], depths: &[f64], weights: &LossWeights) -> Result<f64> {
    check_lengths(pred.len(), target.len())?;
    check_lengths(pred.len(), depths.len())?;
    let mut sum = 0.0;
    for ((p, t), d) in pred.iter().zip(target).zip(depths) {
        check_target(*t)?;
        sum += depth_weight(*d, weights)? * cross_entropy(*p, *t);
    }
    Ok(sum / pred.len() as f64)
}

/// Combined loss over raw prediction and target tensors:
/// `alpha·mse(v_top) + beta·mse(v_bot) + gamma·class(prob)`, where the
/// classification term is plain or depth-weighted cross-entropy and the
/// regression terms run only over cells whose target probability is
/// exactly 1 (rows are meaningless where no stixel exists).
pub fn total_loss(
    pred: &PredictionTensor,
    target: &PredictionTensor,
    weights: &LossWeights,
    use_wbce: bool,
    grid: &DepthGrid,
) -> Result<f64> {
    weights.validate()?;
    if pred.n_bins() != target.n_bins() || pred.n_cols() != target.n_cols() {
        return Err(StixelError::Shape(format!(
            "prediction shape 3 x {} x {} does not match target 3 x {} x {}",
            pred.n_bins(),
            pred.n_cols(),
            target.n_bins(),
            target.n_cols()
        )));
    }
    if grid.n_bins() != pred.n_bins() {
        return Err(StixelError::Shape(format!(
            "grid has {} bins but tensors have {}",
            grid.n_bins(),
            pred.n_bins()
        )));
    }

    let mut top_pred = Vec::new();
    let mut top_target = Vec::new();
    let mut bot_pred = Vec::new();
    let mut bot_target = Vec::new();
    let mut prob_pred = Vec::new();
    let mut prob_target = Vec::new();
    let mut depths = Vec::new();
    for bin in 0..pred.n_bins() {
        let anchor = grid.anchors()[bin];
        for col in 0..pred.n_cols() {
            prob_pred.push(f64::from(pred.get(Property::Prob, bin, col)));
            prob_target.push(f64::from(target.get(Property::Prob, bin, col)));
            depths.push(anchor);
            if target.get(Property::Prob, bin, col) == 1.0 {
                top_pred.push(f64::from(pred.get(Property::VTop, bin, col)));
                top_target.push(f64::from(target.get(Property::VTop, bin, col)));
                bot_pred.push(f64::from(pred.get(Property::VBot, bin, col)));
                bot_target.push(f64::from(target.get(Property::VBot, bin, col)));
            }
        }
    }

    let regr_top = if top_pred.is_empty() {
        0.0
    } else {
        mse(&top_pred, &top_target)?
    };
    let regr_bot = if bot_pred.is_empty() {
        0.0
    } else {
        mse(&bot_pred, &bot_target)?
    };
    let class = if use_wbce {
        wbce(&prob_pred, &prob_target, &depths, weights)?
    } else {
        bce(&prob_pred, &prob_target)?
    };
    Ok(weights.alpha * regr_top + weights.beta * regr_bot + weights.gamma * class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mse_hand_values() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_relative_eq!(
            mse(&[0.2, 0.8], &[0.0, 1.0]).unwrap(),
            0.04,
            epsilon = 1e-12
        );
        assert!(mse(&[0.0], &[0.0, 1.0]).is_err());
        assert!(mse(&[], &[]).is_err());
    }

    #[test]
    fn bce_hand_values() {
        assert_relative_eq!(
            bce(&[0.5], &[1.0]).unwrap(),
            2.0f64.ln(),
            epsilon = 1e-12
        );
        assert!(bce(&[1.0], &[1.0]).unwrap() < 1e-6);
        assert_relative_eq!(
            bce(&[0.9, 0.1], &[1.0, 0.0]).unwrap(),
            -(0.9f64.ln()),
            epsilon = 1e-12
        );
        assert!(bce(&[0.5], &[1.5]).is_err());
    }

    #[test]
    fn bce_gradient_matches_finite_differences() {
        // d/dp at t = 1 is -1/p.
        let p = 0.5;
        let h = 1e-6;
        let numeric =
            (bce(&[p + h], &[1.0]).unwrap() - bce(&[p - h], &[1.0]).unwrap()) / (2.0 * h);
        assert_relative_eq!(numeric, -1.0 / p, epsilon = 1e-6);
    }

    #[test]
    fn depth_weight_endpoints_and_midpoint() {
        let w = LossWeights::default();
        assert_eq!(depth_weight(4.0, &w).unwrap(), 1.0);
        assert_eq!(depth_weight(66.0, &w).unwrap(), 2.0);
        assert_eq!(depth_weight(35.0, &w).unwrap(), 1.5);
        assert!(depth_weight(3.0, &w).is_err());
    }

    #[test]
    fn depth_weight_is_affine() {
        let w = LossWeights::default();
        for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (d1, d2) = (10.0, 50.0);
            let mixed = depth_weight(lambda * d1 + (1.0 - lambda) * d2, &w).unwrap();
            let expected = lambda * depth_weight(d1, &w).unwrap()
                + (1.0 - lambda) * depth_weight(d2, &w).unwrap();
            assert_relative_eq!(mixed, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn wbce_collapses_to_bce_with_unit_weights() {
        let w = LossWeights {
            alpha_max: 1.0,
            ..Default::default()
        };
        let pred = [0.3, 0.9, 0.05, 0.7];
        let target = [0.0, 1.0, 0.0, 1.0];
        let depths = [4.0, 20.0, 45.0, 66.0];
        let a = wbce(&pred, &target, &depths, &w).unwrap();
        let b = bce(&pred, &target).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn wbce_single_element_at_max_depth() {
        let w = LossWeights::default();
        assert_relative_eq!(
            wbce(&[0.5], &[1.0], &[66.0], &w).unwrap(),
            2.0 * 2.0f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn wbce_pair_at_range_ends_is_one_and_a_half_bce() {
        let w = LossWeights::default();
        let pred = [0.4, 0.4];
        let target = [1.0, 1.0];
        let weighted = wbce(&pred, &target, &[4.0, 66.0], &w).unwrap();
        let plain = bce(&pred, &target).unwrap();
        assert_relative_eq!(weighted, 1.5 * plain, epsilon = 1e-12);
    }

    #[test]
    fn wbce_is_bounded_by_weight_range_times_bce() {
        let w = LossWeights::default();
        let pred = [0.2, 0.6, 0.9];
        let target = [0.0, 1.0, 1.0];
        let depths = [10.0, 30.0, 60.0];
        let weighted = wbce(&pred, &target, &depths, &w).unwrap();
        let plain = bce(&pred, &target).unwrap();
        assert!(weighted >= w.alpha_min * plain);
        assert!(weighted <= w.alpha_max * plain);
    }

    fn tensor_with(cells: &[(usize, usize, f32, f32, f32)]) -> PredictionTensor {
        let (bins, cols) = (4usize, 3usize);
        let mut data = vec![0.0f32; 3 * bins * cols];
        for (b, c, vt, vb, p) in cells {
            data[b * cols + c] = *vt;
            data[(bins + b) * cols + c] = *vb;
            data[(2 * bins + b) * cols + c] = *p;
        }
        PredictionTensor::new(data, bins, cols, 24, 100).unwrap()
    }

    #[test]
    fn total_loss_zero_for_identical_tensors() {
        let t = tensor_with(&[(1, 2, 0.2, 0.6, 1.0)]);
        let grid = DepthGrid::linear(4, 4.0, 66.0).unwrap();
        let loss = total_loss(&t, &t, &LossWeights::default(), false, &grid).unwrap();
        assert!(loss < 1e-6, "loss {loss} should collapse to clamping noise");
    }

    #[test]
    fn total_loss_isolates_terms() {
        let target = tensor_with(&[(1, 2, 0.2, 0.6, 1.0)]);
        let pred = tensor_with(&[(1, 2, 0.2, 0.6, 0.7)]);
        let grid = DepthGrid::linear(4, 4.0, 66.0).unwrap();
        let w = LossWeights {
            gamma: 0.0,
            ..Default::default()
        };
        let loss = total_loss(&pred, &target, &w, false, &grid).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn total_loss_composes_from_per_term_values() {
        let target = tensor_with(&[(1, 2, 0.2, 0.6, 1.0)]);
        let pred = tensor_with(&[(1, 2, 0.3, 0.5, 0.8)]);
        let grid = DepthGrid::linear(4, 4.0, 66.0).unwrap();
        let w = LossWeights::default();
        let loss = total_loss(&pred, &target, &w, false, &grid).unwrap();

        // Regression terms see only the one positive cell.
        let vt = mse(&[f64::from(0.3f32)], &[f64::from(0.2f32)]).unwrap();
        let vb = mse(&[f64::from(0.5f32)], &[f64::from(0.6f32)]).unwrap();
        // Classification runs over all 12 cells; 11 are (0, 0) pairs.
        let mut probs = vec![0.0f64; 12];
        let mut targets = vec![0.0f64; 12];
        probs[0] = f64::from(0.8f32);
        targets[0] = 1.0;
        let class = bce(&probs, &targets).unwrap();
        assert_relative_eq!(loss, vt + vb + class, epsilon = 1e-12);
    }

    #[test]
    fn total_loss_shape_mismatch_errors() {
        let a = tensor_with(&[]);
        let b = PredictionTensor::new(vec![0.0; 3 * 2 * 3], 2, 3, 24, 100).unwrap();
        let grid = DepthGrid::linear(4, 4.0, 66.0).unwrap();
        assert!(matches!(
            total_loss(&a, &b, &LossWeights::default(), false, &grid),
            Err(StixelError::Shape(_))
        ));
    }
}

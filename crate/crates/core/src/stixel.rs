//! The Stixel data model: vertical image sticks with metric depth, and the
//! per-frame collection tying them to a camera and a depth grid.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::calib::{backproject_point, CameraCalib};
use crate::error::{Result, StixelError};
use crate::grid::DepthGrid;

/// Default horizontal width of one stixel in pixels.
pub const DEFAULT_STIXEL_WIDTH: u16 = 8;

/// Semantic class of an annotated object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectClass {
    Vehicle,
    Pedestrian,
    Cyclist,
    Sign,
    Other,
}

impl ObjectClass {
    pub fn code(self) -> u8 {
        match self {
            ObjectClass::Vehicle => 0,
            ObjectClass::Pedestrian => 1,
            ObjectClass::Cyclist => 2,
            ObjectClass::Sign => 3,
            ObjectClass::Other => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ObjectClass::Vehicle),
            1 => Some(ObjectClass::Pedestrian),
            2 => Some(ObjectClass::Cyclist),
            3 => Some(ObjectClass::Sign),
            4 => Some(ObjectClass::Other),
            _ => None,
        }
    }
}

/// One vertical stick: a column index, a pixel row span (v grows downward,
/// `v_top < v_bot`), a metric depth and a confidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stixel {
    pub col: u16,
    pub v_top: u16,
    pub v_bot: u16,
    pub depth: f64,
    pub prob: f64,
    pub width_px: u16,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ObjectClass>,
}

impl Stixel {
    pub fn new(col: u16, v_top: u16, v_bot: u16, depth: f64, prob: f64) -> Self {
        Self {
            col,
            v_top,
            v_bot,
            depth,
            prob,
            width_px: DEFAULT_STIXEL_WIDTH,
            label: None,
        }
    }

    pub fn with_label(mut self, label: ObjectClass) -> Self {
        self.label = Some(label);
        self
    }

    /// Horizontal pixel anchoring the stick laterally: the center of its
    /// column band.
    pub fn center_u(&self) -> f64 {
        f64::from(self.col) * f64::from(self.width_px) + f64::from(self.width_px) / 2.0
    }

    /// Check this stixel against a camera and depth grid.
    pub fn validate(&self, calib: &CameraCalib, grid: &DepthGrid) -> Result<()> {
        if self.width_px == 0 {
            return Err(StixelError::Config("stixel width must be positive".into()));
        }
        if self.v_top >= self.v_bot {
            return Err(StixelError::Range(format!(
                "stixel rows must satisfy v_top < v_bot, got {} >= {}",
                self.v_top, self.v_bot
            )));
        }
        if u32::from(self.v_bot) > calib.img_height {
            return Err(StixelError::Range(format!(
                "stixel bottom row {} exceeds image height {}",
                self.v_bot, calib.img_height
            )));
        }
        if u32::from(self.col) >= calib.n_columns(self.width_px) {
            return Err(StixelError::Range(format!(
                "stixel column {} exceeds column count {}",
                self.col,
                calib.n_columns(self.width_px)
            )));
        }
        if !(self.depth >= grid.d_min() && self.depth <= grid.d_max()) {
            return Err(StixelError::Range(format!(
                "stixel depth {} outside grid range [{}, {}]",
                self.depth,
                grid.d_min(),
                grid.d_max()
            )));
        }
        if !(0.0..=1.0).contains(&self.prob) {
            return Err(StixelError::Range(format!(
                "stixel probability {} outside [0, 1]",
                self.prob
            )));
        }
        Ok(())
    }
}

/// The 3D realization of a stixel: top and bottom endpoints in the world
/// frame, sharing one depth along the camera optical axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment3D {
    pub top: Vector3<f64>,
    pub bot: Vector3<f64>,
}

impl Segment3D {
    pub fn length(&self) -> f64 {
        (self.top - self.bot).norm()
    }

    pub fn midpoint(&self) -> Vector3<f64> {
        0.5 * (self.top + self.bot)
    }

    /// A point at parameter `t` in [0, 1] from top to bottom.
    pub fn point_at(&self, t: f64) -> Vector3<f64> {
        self.top + t * (self.bot - self.top)
    }
}

/// Backproject a stixel into a world-frame vertical segment at its depth.
pub fn stixel_to_segment3d(calib: &CameraCalib, stixel: &Stixel) -> Result<Segment3D> {
    let u = stixel.center_u();
    let top = backproject_point(calib, u, f64::from(stixel.v_top), stixel.depth)?;
    let bot = backproject_point(calib, u, f64::from(stixel.v_bot), stixel.depth)?;
    Ok(Segment3D { top, bot })
}

/// All stixels of one frame plus the calibration and depth grid that
/// produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct StixelWorld {
    pub stixels: Vec<Stixel>,
    pub calib: CameraCalib,
    pub grid: DepthGrid,
    pub frame_id: String,
}

impl StixelWorld {
    pub fn new(calib: CameraCalib, grid: DepthGrid, frame_id: impl Into<String>) -> Self {
        Self {
            stixels: Vec::new(),
            calib,
            grid,
            frame_id: frame_id.into(),
        }
    }

    /// Validate every member stixel against this world's calibration and
    /// grid.
    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.stixels.iter().enumerate() {
            s.validate(&self.calib, &self.grid)
                .map_err(|e| StixelError::Range(format!("stixel {i}: {e}")))?;
        }
        Ok(())
    }

    /// (column, depth bin) pairs occupied by more than one stixel. Worlds
    /// decoded from network output never have collisions by construction;
    /// generated ground truth may.
    pub fn bin_collisions(&self) -> Vec<(u16, usize)> {
        let mut seen = std::collections::HashMap::new();
        for s in &self.stixels {
            if let Ok(bin) = self.grid.depth_to_bin(s.depth) {
                *seen.entry((s.col, bin)).or_insert(0usize) += 1;
            }
        }
        let mut dup: Vec<(u16, usize)> = seen
            .into_iter()
            .filter(|(_, n)| *n > 1)
            .map(|(k, _)| k)
            .collect();
        dup.sort_unstable();
        dup
    }
}

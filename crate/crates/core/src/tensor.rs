//! Raw network output tensors and their decoding into stixel worlds.
//!
//! A prediction tensor holds three properties per depth bin per column:
//! the normalized top row, the normalized bottom row and the probability
//! that the cell carries a stixel. Decoding is a single linear scan that
//! keeps cells whose probability strictly exceeds a threshold, so at most
//! one stixel exists per (column, depth bin) and no suppression pass is
//! needed.
//!
//! File layout (little-endian): magic `SNXT`, u8 version = 1, u16 property
//! count = 3, u16 depth bins, u16 columns, u32 image width, u32 image
//! height, then all values as f32 in row-major (property, bin, column)
//! order.

use std::io::{Read, Write};

use crate::calib::CameraCalib;
use crate::error::{Result, StixelError};
use crate::grid::DepthGrid;
use crate::stixel::{Stixel, StixelWorld, DEFAULT_STIXEL_WIDTH};

pub const TENSOR_MAGIC: &[u8; 4] = b"SNXT";
pub const TENSOR_VERSION: u8 = 1;
/// Property channels: top row, bottom row, probability — in this order.
pub const N_PROPERTIES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    VTop = 0,
    VBot = 1,
    Prob = 2,
}

/// A `[3, D, C]` array of 32-bit network outputs plus the image geometry
/// it was predicted for. Row values are normalized to [0, 1] of the image
/// height; probabilities live in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTensor {
    data: Vec<f32>,
    n_bins: usize,
    n_cols: usize,
    img_width: u32,
    img_height: u32,
}

impl PredictionTensor {
    pub fn new(
        data: Vec<f32>,
        n_bins: usize,
        n_cols: usize,
        img_width: u32,
        img_height: u32,
    ) -> Result<Self> {
        let expected = N_PROPERTIES * n_bins * n_cols;
        if data.len() != expected {
            return Err(StixelError::Shape(format!(
                "tensor payload holds {} values, expected 3 x {n_bins} x {n_cols} = {expected}",
                data.len()
            )));
        }
        if n_bins == 0 || n_cols == 0 {
            return Err(StixelError::Shape(
                "tensor dimensions must be positive".into(),
            ));
        }
        let t = Self {
            data,
            n_bins,
            n_cols,
            img_width,
            img_height,
        };
        for (name, prop) in [
            ("v_top", Property::VTop),
            ("v_bot", Property::VBot),
            ("prob", Property::Prob),
        ] {
            for b in 0..n_bins {
                for c in 0..n_cols {
                    let v = t.get(prop, b, c);
                    if !(0.0..=1.0).contains(&v) {
                        return Err(StixelError::Range(format!(
                            "{name} channel value {v} at bin {b}, column {c} outside [0, 1]"
                        )));
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn img_width(&self) -> u32 {
        self.img_width
    }

    pub fn img_height(&self) -> u32 {
        self.img_height
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, prop: Property, bin: usize, col: usize) -> f32 {
        self.data[(prop as usize * self.n_bins + bin) * self.n_cols + col]
    }

    pub fn v_top(&self, bin: usize, col: usize) -> f32 {
        self.get(Property::VTop, bin, col)
    }

    pub fn v_bot(&self, bin: usize, col: usize) -> f32 {
        self.get(Property::VBot, bin, col)
    }

    pub fn prob(&self, bin: usize, col: usize) -> f32 {
        self.get(Property::Prob, bin, col)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(TENSOR_MAGIC)?;
        w.write_all(&[TENSOR_VERSION])?;
        w.write_all(&(N_PROPERTIES as u16).to_le_bytes())?;
        w.write_all(&(self.n_bins as u16).to_le_bytes())?;
        w.write_all(&(self.n_cols as u16).to_le_bytes())?;
        w.write_all(&self.img_width.to_le_bytes())?;
        w.write_all(&self.img_height.to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut file)
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        const HEADER: usize = 19;
        if bytes.len() < HEADER {
            return Err(StixelError::Format(format!(
                "tensor header needs {HEADER} bytes, input ends at byte {}",
                bytes.len()
            )));
        }
        if &bytes[0..4] != TENSOR_MAGIC {
            return Err(StixelError::Format(format!(
                "bad tensor magic {:?}, expected {:?}",
                &bytes[0..4],
                TENSOR_MAGIC
            )));
        }
        if bytes[4] != TENSOR_VERSION {
            return Err(StixelError::Format(format!(
                "unsupported tensor version {}, expected {TENSOR_VERSION}",
                bytes[4]
            )));
        }
        let props = u16::from_le_bytes(bytes[5..7].try_into().unwrap()) as usize;
        if props != N_PROPERTIES {
            return Err(StixelError::Format(format!(
                "property axis must be {N_PROPERTIES}, got {props}"
            )));
        }
        let n_bins = u16::from_le_bytes(bytes[7..9].try_into().unwrap()) as usize;
        let n_cols = u16::from_le_bytes(bytes[9..11].try_into().unwrap()) as usize;
        let img_width = u32::from_le_bytes(bytes[11..15].try_into().unwrap());
        let img_height = u32::from_le_bytes(bytes[15..19].try_into().unwrap());
        let n_values = N_PROPERTIES * n_bins * n_cols;
        let expected = HEADER + n_values * 4;
        if bytes.len() != expected {
            return Err(StixelError::Format(format!(
                "tensor payload length mismatch: expected {expected} bytes for 3 x {n_bins} x \
                 {n_cols}, got {}",
                bytes.len()
            )));
        }
        let data = bytes[HEADER..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(data, n_bins, n_cols, img_width, img_height)
    }
}

/// Per-decode bookkeeping: how many cells passed the threshold and how many
/// of those were dropped for a degenerate row span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecodeSummary {
    pub emitted: usize,
    pub dropped_degenerate: usize,
}

/// Decode a tensor into a stixel world by keeping every cell whose
/// probability strictly exceeds `threshold`.
///
/// Rows are denormalized by the image height and rounded; cells whose
/// rounded top row does not lie above the bottom row are dropped and
/// counted rather than clamped into zero-height sticks.
pub fn decode(
    tensor: &PredictionTensor,
    calib: &CameraCalib,
    grid: &DepthGrid,
    threshold: f64,
) -> Result<(StixelWorld, DecodeSummary)> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(StixelError::Config(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    if grid.n_bins() != tensor.n_bins() {
        return Err(StixelError::Config(format!(
            "grid has {} bins but tensor has {}",
            grid.n_bins(),
            tensor.n_bins()
        )));
    }
    if tensor.img_width() != calib.img_width || tensor.img_height() != calib.img_height {
        return Err(StixelError::Config(format!(
            "tensor image size {}x{} does not match calibration {}x{}",
            tensor.img_width(),
            tensor.img_height(),
            calib.img_width,
            calib.img_height
        )));
    }
    let width_px = DEFAULT_STIXEL_WIDTH;
    if tensor.n_cols() as u32 * u32::from(width_px) > calib.img_width {
        return Err(StixelError::Config(format!(
            "{} columns of {width_px} px exceed image width {}",
            tensor.n_cols(),
            calib.img_width
        )));
    }

    let mut world = StixelWorld::new(calib.clone(), grid.clone(), "");
    let mut summary = DecodeSummary::default();
    let h = f64::from(tensor.img_height());
    for col in 0..tensor.n_cols() {
        for bin in 0..tensor.n_bins() {
            let p = f64::from(tensor.prob(bin, col));
            if p <= threshold {
                continue;
            }
            let v_top = (f64::from(tensor.v_top(bin, col)) * h).round() as u32;
            let v_bot = (f64::from(tensor.v_bot(bin, col)) * h).round() as u32;
            if v_top >= v_bot {
                summary.dropped_degenerate += 1;
                continue;
            }
            world.stixels.push(Stixel::new(
                col as u16,
                v_top as u16,
                v_bot as u16,
                grid.anchors()[bin],
                p,
            ));
            summary.emitted += 1;
        }
    }
    Ok((world, summary))
}

/// Decode one world per threshold. Thresholds must ascend; the resulting
/// stixel sets are nested (each threshold keeps a subset of the previous).
pub fn sweep_thresholds(
    tensor: &PredictionTensor,
    calib: &CameraCalib,
    grid: &DepthGrid,
    thresholds: &[f64],
) -> Result<Vec<StixelWorld>> {
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(StixelError::Config(
            "thresholds must be strictly ascending".into(),
        ));
    }
    thresholds
        .iter()
        .map(|t| decode(tensor, calib, grid, *t).map(|(w, _)| w))
        .collect()
}

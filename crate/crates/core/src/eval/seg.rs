//! 2D segmentation coverage scoring.
//!
//! The ground-truth mask is a full-resolution label image. Labels whose
//! class maps to an evaluated group (vehicle, pedestrian, cyclist) mark
//! pixels of interest; sampling every `width_px`-th pixel in both axes
//! turns the mask into a coarse interest grid (160 x 240 for a 1280 x 1920
//! image at 8 px stixels). Predicted stixels paint the same grid from
//! their top row down to their bottom row, and the two grids are compared
//! with the Jaccard index.

use std::collections::HashMap;

use serde::Deserialize;

use crate::error::{Result, StixelError};
use crate::stixel::StixelWorld;

/// Evaluated semantic groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvalGroup {
    Vehicle,
    Pedestrian,
    Cyclist,
}

/// Fine label names belonging to each evaluated group; anything else is
/// not used for scoring.
pub const VEHICLE_LABELS: &[&str] = &[
    "ego-vehicle",
    "car",
    "truck",
    "bus",
    "other large vehicle",
    "trailer",
];
pub const PEDESTRIAN_LABELS: &[&str] = &["pedestrian", "pedestrian object"];
pub const CYCLIST_LABELS: &[&str] = &["bicycle", "motorcycle", "cyclist", "motorcyclist"];

/// Maps raw mask bytes to evaluated groups. Built from a sidecar JSON
/// declaring the label vocabulary: `{"labels": {"car": 1, "road": 2, ...}}`.
#[derive(Debug, Clone)]
pub struct ClassMap {
    byte_to_group: [Option<EvalGroup>; 256],
}

impl ClassMap {
    /// Build from label-name-to-byte pairs. Names are matched
    /// case-insensitively against the evaluated vocabulary; unknown names
    /// map to no group.
    pub fn from_names<'a>(labels: impl IntoIterator<Item = (&'a str, u8)>) -> Self {
        let mut byte_to_group = [None; 256];
        for (name, byte) in labels {
            byte_to_group[byte as usize] = group_for_name(name);
        }
        Self { byte_to_group }
    }

    pub fn from_sidecar_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Sidecar {
            labels: HashMap<String, u8>,
        }
        let mut de = serde_json::Deserializer::from_str(text);
        let sidecar: Sidecar = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| StixelError::Format(format!("label sidecar file: {e}")))?;
        Ok(Self::from_names(
            sidecar.labels.iter().map(|(k, v)| (k.as_str(), *v)),
        ))
    }

    pub fn load_sidecar(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_sidecar_json(&text)
    }

    pub fn group_for(&self, byte: u8) -> Option<EvalGroup> {
        self.byte_to_group[byte as usize]
    }

    /// Whether a mask byte belongs to any evaluated group.
    pub fn is_interest(&self, byte: u8) -> bool {
        self.byte_to_group[byte as usize].is_some()
    }
}

fn group_for_name(name: &str) -> Option<EvalGroup> {
    let n = name.trim().to_ascii_lowercase();
    if VEHICLE_LABELS.contains(&n.as_str()) {
        Some(EvalGroup::Vehicle)
    } else if PEDESTRIAN_LABELS.contains(&n.as_str()) {
        Some(EvalGroup::Pedestrian)
    } else if CYCLIST_LABELS.contains(&n.as_str()) {
        Some(EvalGroup::Cyclist)
    } else {
        None
    }
}

/// A full-resolution 8-bit label image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMask {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl LabelMask {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != (width as usize) * (height as usize) {
            return Err(StixelError::Shape(format!(
                "mask payload holds {} bytes, expected {width} x {height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    /// Parse a binary (P5) PGM with a maximum value of 255.
    pub fn from_pgm(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let mut token = |bytes: &[u8]| -> Result<String> {
            // Skip whitespace and '#' comment lines between header tokens.
            loop {
                while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                    pos += 1;
                }
                if pos < bytes.len() && bytes[pos] == b'#' {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                    continue;
                }
                break;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                return Err(StixelError::Format("truncated PGM header".into()));
            }
            Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
        };

        if token(bytes)? != "P5" {
            return Err(StixelError::Format("mask must be a binary (P5) PGM".into()));
        }
        let parse = |s: String| -> Result<u32> {
            s.parse()
                .map_err(|_| StixelError::Format(format!("bad PGM header token {s:?}")))
        };
        let width = parse(token(bytes)?)?;
        let height = parse(token(bytes)?)?;
        let maxval = parse(token(bytes)?)?;
        if maxval != 255 {
            return Err(StixelError::Format(format!(
                "PGM max value must be 255 for label masks, got {maxval}"
            )));
        }
        pos += 1; // single whitespace after maxval
        let expected = (width as usize) * (height as usize);
        if bytes.len() < pos + expected {
            return Err(StixelError::Format(format!(
                "PGM pixel data truncated: expected {expected} bytes, got {}",
                bytes.len().saturating_sub(pos)
            )));
        }
        Self::new(width, height, bytes[pos..pos + expected].to_vec())
    }

    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_pgm(&bytes)
    }
}

/// A downsampled boolean coverage grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<bool>,
}

impl CoverageGrid {
    fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![false; rows * cols],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    fn set(&mut self, row: usize, col: usize) {
        self.cells[row * self.cols + col] = true;
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }
}

/// Sample every `step`-th pixel of the mask and keep cells whose label
/// maps to an evaluated group.
pub fn interest_grid(mask: &LabelMask, map: &ClassMap, step: u32) -> Result<CoverageGrid> {
    if step == 0 || !mask.width.is_multiple_of(step) || !mask.height.is_multiple_of(step) {
        return Err(StixelError::Format(format!(
            "mask size {} x {} is not divisible by the sampling step {step}",
            mask.width, mask.height
        )));
    }
    let rows = (mask.height / step) as usize;
    let cols = (mask.width / step) as usize;
    let mut grid = CoverageGrid::new(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if map.is_interest(mask.get(c as u32 * step, r as u32 * step)) {
                grid.set(r, c);
            }
        }
    }
    Ok(grid)
}

/// Paint each stixel from its top row down to (exclusive) its bottom row
/// onto the coverage grid.
pub fn prediction_grid(world: &StixelWorld, step: u32) -> Result<CoverageGrid> {
    if step == 0
        || !world.calib.img_width.is_multiple_of(step)
        || !world.calib.img_height.is_multiple_of(step)
    {
        return Err(StixelError::Format(format!(
            "image size {} x {} is not divisible by the sampling step {step}",
            world.calib.img_width, world.calib.img_height
        )));
    }
    let rows = (world.calib.img_height / step) as usize;
    let cols = (world.calib.img_width / step) as usize;
    let mut grid = CoverageGrid::new(rows, cols);
    for s in &world.stixels {
        if u32::from(s.width_px) != step {
            return Err(StixelError::Config(format!(
                "stixel width {} does not match the sampling step {step}",
                s.width_px
            )));
        }
        let col = s.col as usize;
        if col >= cols {
            continue;
        }
        let r0 = u32::from(s.v_top).div_ceil(step) as usize;
        for r in r0..rows {
            let v = r as u32 * step;
            if v >= u32::from(s.v_bot) {
                break;
            }
            if v >= u32::from(s.v_top) {
                grid.set(r, col);
            }
        }
    }
    Ok(grid)
}

/// Jaccard index of two coverage grids. Empty-union pairs score 0.
pub fn grid_iou(a: &CoverageGrid, b: &CoverageGrid) -> Result<f64> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(StixelError::Shape(format!(
            "grid sizes differ: {} x {} vs {} x {}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (x, y) in a.cells.iter().zip(&b.cells) {
        inter += usize::from(*x && *y);
        union += usize::from(*x || *y);
    }
    if union == 0 {
        return Ok(0.0);
    }
    Ok(inter as f64 / union as f64)
}

/// 2D coverage score of a predicted world against a label mask: the
/// Jaccard index between the downsampled interest grid and the painted
/// stixel grid.
pub fn seg_iou(world: &StixelWorld, mask: &LabelMask, map: &ClassMap) -> Result<f64> {
    if mask.width != world.calib.img_width || mask.height != world.calib.img_height {
        return Err(StixelError::Format(format!(
            "mask size {} x {} does not match the image size {} x {}",
            mask.width, mask.height, world.calib.img_width, world.calib.img_height
        )));
    }
    let step = world
        .stixels
        .first()
        .map_or(u32::from(crate::stixel::DEFAULT_STIXEL_WIDTH), |s| {
            u32::from(s.width_px)
        });
    let interest = interest_grid(mask, map, step)?;
    let predicted = prediction_grid(world, step)?;
    grid_iou(&interest, &predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calib::CameraCalib;
    use crate::grid::DepthGrid;
    use crate::stixel::Stixel;

    fn class_map() -> ClassMap {
        ClassMap::from_names([("car", 1u8), ("pedestrian", 2), ("road", 3), ("sign", 4)])
    }

    fn world_with(stixels: Vec<Stixel>) -> StixelWorld {
        let calib =
            CameraCalib::with_identity_extrinsics(2000.0, 2000.0, 960.0, 640.0, 1920, 1280)
                .unwrap();
        let mut w = StixelWorld::new(calib, DepthGrid::default_linear(), "seg");
        w.stixels = stixels;
        w
    }

    fn mask_with_rect(x0: u32, y0: u32, x1: u32, y1: u32, label: u8) -> LabelMask {
        let mut data = vec![0u8; 1920 * 1280];
        for y in y0..y1 {
            for x in x0..x1 {
                data[(y * 1920 + x) as usize] = label;
            }
        }
        LabelMask::new(1920, 1280, data).unwrap()
    }

    #[test]
    fn class_map_follows_group_vocabulary() {
        let m = class_map();
        assert_eq!(m.group_for(1), Some(EvalGroup::Vehicle));
        assert_eq!(m.group_for(2), Some(EvalGroup::Pedestrian));
        assert_eq!(m.group_for(3), None);
        assert_eq!(m.group_for(4), None); // signs are not evaluated
        assert!(!m.is_interest(0));
    }

    #[test]
    fn sidecar_json_parses() {
        let m = ClassMap::from_sidecar_json(r#"{"labels": {"Car": 1, "cyclist": 9}}"#).unwrap();
        assert_eq!(m.group_for(1), Some(EvalGroup::Vehicle));
        assert_eq!(m.group_for(9), Some(EvalGroup::Cyclist));
        assert!(ClassMap::from_sidecar_json("{}").is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let mask = mask_with_rect(0, 0, 16, 8, 1);
        let bytes = mask.to_pgm();
        assert_eq!(LabelMask::from_pgm(&bytes).unwrap(), mask);
        assert!(LabelMask::from_pgm(&bytes[..bytes.len() - 1]).is_err());
        assert!(LabelMask::from_pgm(b"P2\n2 2\n255\n").is_err());
    }

    #[test]
    fn interest_grid_is_160_by_240() {
        let mask = mask_with_rect(0, 0, 1920, 1280, 1);
        let grid = interest_grid(&mask, &class_map(), 8).unwrap();
        assert_eq!((grid.rows, grid.cols), (160, 240));
        assert_eq!(grid.count(), 160 * 240);
    }

    #[test]
    fn identical_coverage_scores_one() {
        // Interest rectangle: columns 10..20, sample rows 40..80.
        let mask = mask_with_rect(80, 320, 160, 640, 1);
        let stixels = (10u16..20)
            .map(|c| Stixel::new(c, 320, 640, 10.0, 1.0))
            .collect();
        let world = world_with(stixels);
        assert_eq!(seg_iou(&world, &mask, &class_map()).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_coverage_scores_zero() {
        let mask = mask_with_rect(80, 320, 160, 640, 1);
        let world = world_with(vec![Stixel::new(100, 800, 1000, 10.0, 1.0)]);
        assert_eq!(seg_iou(&world, &mask, &class_map()).unwrap(), 0.0);
    }

    #[test]
    fn half_coverage_scores_half() {
        // Prediction covers exactly the top half of the interest rectangle.
        let mask = mask_with_rect(80, 320, 160, 640, 1);
        let stixels = (10u16..20)
            .map(|c| Stixel::new(c, 320, 480, 10.0, 1.0))
            .collect();
        let world = world_with(stixels);
        assert_eq!(seg_iou(&world, &mask, &class_map()).unwrap(), 0.5);
    }

    #[test]
    fn non_interest_labels_do_not_count() {
        let mask = mask_with_rect(80, 320, 160, 640, 3); // road
        let world = world_with(vec![]);
        assert_eq!(seg_iou(&world, &mask, &class_map()).unwrap(), 0.0);
    }

    #[test]
    fn indivisible_mask_is_rejected() {
        let calib =
            CameraCalib::with_identity_extrinsics(2000.0, 2000.0, 960.0, 640.0, 1919, 1280)
                .unwrap();
        let mut world = StixelWorld::new(calib, DepthGrid::default_linear(), "seg");
        world.stixels.push(Stixel::new(0, 0, 8, 10.0, 1.0));
        let mask = LabelMask::new(1919, 1280, vec![0; 1919 * 1280]).unwrap();
        assert!(matches!(
            seg_iou(&world, &mask, &class_map()),
            Err(StixelError::Format(_))
        ));
    }

    #[test]
    fn grid_iou_is_symmetric_and_one_only_for_identical_nonempty() {
        let mask_a = mask_with_rect(80, 320, 160, 640, 1);
        let mask_b = mask_with_rect(80, 320, 160, 480, 1);
        let map = class_map();
        let a = interest_grid(&mask_a, &map, 8).unwrap();
        let b = interest_grid(&mask_b, &map, 8).unwrap();
        assert_eq!(grid_iou(&a, &b).unwrap(), grid_iou(&b, &a).unwrap());
        assert_eq!(grid_iou(&a, &a).unwrap(), 1.0);
        // Both empty: identical but not scored as a perfect match.
        let empty = interest_grid(&mask_with_rect(0, 0, 0, 0, 1), &map, 8).unwrap();
        assert_eq!(grid_iou(&empty, &empty).unwrap(), 0.0);
    }

    #[test]
    fn mask_size_mismatch_is_rejected() {
        let mask = LabelMask::new(960, 640, vec![0; 960 * 640]).unwrap();
        let world = world_with(vec![]);
        assert!(seg_iou(&world, &mask, &class_map()).is_err());
    }
}

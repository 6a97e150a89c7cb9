//! Point cloud container and file formats.
//!
//! Binary layout (little-endian): magic `PCL1`, one flags byte (bit 0 set
//! when per-point labels follow the coordinates), u32 point count, then
//! count × 3 × f32 coordinates and optionally count × u8 labels. A CSV
//! alternative (`x,y,z[,label]` per line, `#` comments) is accepted too.

use std::io::{Read, Write};

use nalgebra::Vector3;

use crate::error::{Result, StixelError};

pub const CLOUD_MAGIC: &[u8; 4] = b"PCL1";
const FLAG_LABELS: u8 = 0b0000_0001;

/// LiDAR returns in the sensor/world frame (x forward, y left, z up),
/// optionally labeled with a semantic class id per point.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Vector3<f64>>,
    labels: Option<Vec<u8>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        Self::build(points, None)
    }

    pub fn with_labels(points: Vec<Vector3<f64>>, labels: Vec<u8>) -> Result<Self> {
        Self::build(points, Some(labels))
    }

    fn build(points: Vec<Vector3<f64>>, labels: Option<Vec<u8>>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite())) {
            return Err(StixelError::Range(format!(
                "point cloud contains non-finite coordinates: ({}, {}, {})",
                p.x, p.y, p.z
            )));
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(StixelError::Shape(format!(
                    "label count {} does not match point count {}",
                    l.len(),
                    points.len()
                )));
            }
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let count = u32::try_from(self.points.len()).map_err(|_| {
            StixelError::Capacity(format!("point count {} exceeds u32", self.points.len()))
        })?;
        w.write_all(CLOUD_MAGIC)?;
        let flags = if self.labels.is_some() { FLAG_LABELS } else { 0 };
        w.write_all(&[flags])?;
        w.write_all(&count.to_le_bytes())?;
        for p in &self.points {
            for c in [p.x, p.y, p.z] {
                w.write_all(&(c as f32).to_le_bytes())?;
            }
        }
        if let Some(labels) = &self.labels {
            w.write_all(labels)?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_binary(&bytes)
    }

    pub fn from_binary(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 9 {
            return Err(StixelError::Format(format!(
                "point cloud header needs 9 bytes, input ends at byte {}",
                bytes.len()
            )));
        }
        if &bytes[0..4] != CLOUD_MAGIC {
            return Err(StixelError::Format(format!(
                "bad point cloud magic {:?}, expected {:?}",
                &bytes[0..4],
                CLOUD_MAGIC
            )));
        }
        let flags = bytes[4];
        let count = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
        let coord_len = count * 12;
        let label_len = if flags & FLAG_LABELS != 0 { count } else { 0 };
        let expected = 9 + coord_len + label_len;
        if bytes.len() != expected {
            return Err(StixelError::Format(format!(
                "point cloud payload length mismatch: expected {expected} bytes, got {}",
                bytes.len()
            )));
        }
        let mut points = Vec::with_capacity(count);
        for i in 0..count {
            let off = 9 + i * 12;
            let x = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            let y = f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap());
            let z = f32::from_le_bytes(bytes[off + 8..off + 12].try_into().unwrap());
            points.push(Vector3::new(f64::from(x), f64::from(y), f64::from(z)));
        }
        let labels = (label_len > 0).then(|| bytes[9 + coord_len..].to_vec());
        Self::build(points, labels)
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        let mut any_label = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 && fields.len() != 4 {
                return Err(StixelError::Format(format!(
                    "line {}: expected x,y,z[,label], got {} fields",
                    lineno + 1,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse().map_err(|_| {
                    StixelError::Format(format!("line {}: bad number {s:?}", lineno + 1))
                })
            };
            points.push(Vector3::new(
                parse(fields[0])?,
                parse(fields[1])?,
                parse(fields[2])?,
            ));
            if fields.len() == 4 {
                any_label = true;
                labels.push(fields[3].parse().map_err(|_| {
                    StixelError::Format(format!("line {}: bad label {:?}", lineno + 1, fields[3]))
                })?);
            } else {
                labels.push(0);
            }
        }
        Self::build(points, any_label.then_some(labels))
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
            let text = std::fs::read_to_string(path)?;
            Self::from_csv(&text)
        } else {
            let bytes = std::fs::read(path)?;
            Self::from_binary(&bytes)
        }
    }
}

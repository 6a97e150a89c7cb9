//! Oriented 3D bounding boxes used by the evaluator and the annotation
//! ground-truth rule.
//!
//! Boxes live in the sensor/world frame (x forward, y left, z up) with the
//! camera at the origin; `yaw` rotates the box about the vertical axis,
//! `length` runs along the heading, `width` across it and `height` up.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StixelError};
use crate::stixel::ObjectClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub yaw: f64,
    pub class: ObjectClass,
    pub num_lidar_points: u32,
}

impl Box3D {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        cx: f64,
        cy: f64,
        cz: f64,
        length: f64,
        width: f64,
        height: f64,
        yaw: f64,
        class: ObjectClass,
        num_lidar_points: u32,
    ) -> Result<Self> {
        let b = Self {
            cx,
            cy,
            cz,
            length,
            width,
            height,
            yaw,
            class,
            num_lidar_points,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.width > 0.0 && self.height > 0.0) {
            return Err(StixelError::Config(format!(
                "box dimensions must be positive, got {} x {} x {}",
                self.length, self.width, self.height
            )));
        }
        if !(self.yaw > -std::f64::consts::PI && self.yaw <= std::f64::consts::PI) {
            return Err(StixelError::Config(format!(
                "box yaw {} outside (-pi, pi]",
                self.yaw
            )));
        }
        if [self.cx, self.cy, self.cz].iter().any(|v| !v.is_finite()) {
            return Err(StixelError::Config("box center must be finite".into()));
        }
        Ok(())
    }

    pub fn center(&self) -> Vector3<f64> {
        Vector3::new(self.cx, self.cy, self.cz)
    }

    /// Euclidean distance of the center from the camera origin.
    pub fn range(&self) -> f64 {
        self.center().norm()
    }

    /// Transform a world point into the box's yaw-aligned local frame.
    pub fn to_local(&self, p: &Vector3<f64>) -> Vector3<f64> {
        let d = p - self.center();
        let (s, c) = self.yaw.sin_cos();
        Vector3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    }

    /// Whether a world point lies inside the box (boundary inclusive).
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        let l = self.to_local(p);
        l.x.abs() <= self.length / 2.0
            && l.y.abs() <= self.width / 2.0
            && l.z.abs() <= self.height / 2.0
    }

    /// Parse a JSON list of boxes.
    pub fn list_from_json(text: &str) -> Result<Vec<Box3D>> {
        let mut de = serde_json::Deserializer::from_str(text);
        let boxes: Vec<Box3D> = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| StixelError::Format(format!("box annotation file: {e}")))?;
        for (i, b) in boxes.iter().enumerate() {
            b.validate()
                .map_err(|e| StixelError::Format(format!("box {i}: {e}")))?;
        }
        Ok(boxes)
    }

    pub fn list_to_json(boxes: &[Box3D]) -> Result<String> {
        serde_json::to_string_pretty(boxes)
            .map_err(|e| StixelError::Format(format!("box serialization failed: {e}")))
    }

    pub fn load_list(path: &std::path::Path) -> Result<Vec<Box3D>> {
        let text = std::fs::read_to_string(path)?;
        Self::list_from_json(&text)
    }
}

//! Pinhole camera calibration and 2D↔3D projection.
//!
//! Image coordinates follow the usual convention: `u` grows to the right,
//! `v` grows downward. The camera frame has `z` along the optical axis,
//! `x` right, `y` down. Extrinsics `(R, t)` map camera coordinates to the
//! world frame: `x_world = R · x_cam + t`, so `t` is the camera origin
//! expressed in world coordinates.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StixelError};

/// Tolerance for the rotation orthonormality and determinant checks.
pub const ROTATION_TOL: f64 = 1e-9;

/// Intrinsic and extrinsic calibration of one pinhole camera.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraCalib {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
    pub img_width: u32,
    pub img_height: u32,
}

impl CameraCalib {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
        img_width: u32,
        img_height: u32,
    ) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) || !fx.is_finite() || !fy.is_finite() {
            return Err(StixelError::Config(format!(
                "focal lengths must be positive, got fx={fx}, fy={fy}"
            )));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(StixelError::Config(format!(
                "principal point must be finite, got cx={cx}, cy={cy}"
            )));
        }
        if img_width == 0 || img_height == 0 {
            return Err(StixelError::Config(format!(
                "image dimensions must be positive, got {img_width}x{img_height}"
            )));
        }
        let gram = rotation.transpose() * rotation - Matrix3::identity();
        let max_dev = gram.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_dev >= ROTATION_TOL {
            return Err(StixelError::Config(format!(
                "rotation is not orthonormal: max |R'R - I| = {max_dev:.3e}"
            )));
        }
        if (rotation.determinant() - 1.0).abs() >= ROTATION_TOL {
            return Err(StixelError::Config(format!(
                "rotation determinant is {:.12}, expected 1",
                rotation.determinant()
            )));
        }
        if translation.iter().any(|v| !v.is_finite()) {
            return Err(StixelError::Config("translation must be finite".into()));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            rotation,
            translation,
            img_width,
            img_height,
        })
    }

    /// Camera frame equals the world frame (R = I, t = 0).
    pub fn with_identity_extrinsics(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        img_width: u32,
        img_height: u32,
    ) -> Result<Self> {
        Self::new(
            fx,
            fy,
            cx,
            cy,
            Matrix3::identity(),
            Vector3::zeros(),
            img_width,
            img_height,
        )
    }

    /// A forward-facing camera in an automotive world frame (x forward, y left,
    /// z up): the optical axis points along world +x and the image v axis
    /// points along world -z. `cam_height` is the mounting height above the
    /// world origin.
    pub fn forward_facing(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        img_width: u32,
        img_height: u32,
        cam_height: f64,
    ) -> Result<Self> {
        // Columns are the camera axes (right, down, forward) in world coords.
        let rotation = Matrix3::new(
            0.0, 0.0, 1.0, //
            -1.0, 0.0, 0.0, //
            0.0, -1.0, 0.0,
        );
        Self::new(
            fx,
            fy,
            cx,
            cy,
            rotation,
            Vector3::new(0.0, 0.0, cam_height),
            img_width,
            img_height,
        )
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (p - self.translation)
    }

    pub fn camera_to_world(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Number of stixel columns for a given stick width.
    pub fn n_columns(&self, width_px: u16) -> u32 {
        self.img_width.div_ceil(u32::from(width_px))
    }

    /// Serialize to the calibration JSON schema.
    pub fn to_json(&self) -> Result<String> {
        let file = CalibJson::from_calib(self);
        serde_json::to_string_pretty(&file)
            .map_err(|e| StixelError::Format(format!("calibration serialization failed: {e}")))
    }

    /// Parse the calibration JSON schema. `R` and `t` default to the
    /// identity rotation and zero translation when absent.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let file: CalibJson = serde_path_to_error::deserialize(&mut de)
            .map_err(|e| StixelError::Format(format!("calibration file: {e}")))?;
        file.into_calib()
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

/// On-disk calibration schema: `R` is 9 numbers row-major, `t` is 3 numbers.
#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct CalibJson {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(rename = "R", skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    pub width: u32,
    pub height: u32,
}

impl CalibJson {
    pub(crate) fn from_calib(c: &CameraCalib) -> Self {
        Self {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            r: Some(c.rotation.transpose().as_slice().to_vec()),
            t: Some(c.translation.as_slice().to_vec()),
            width: c.img_width,
            height: c.img_height,
        }
    }

    pub(crate) fn into_calib(self) -> Result<CameraCalib> {
        let rotation = match &self.r {
            None => Matrix3::identity(),
            Some(v) if v.len() == 9 => Matrix3::from_row_slice(v),
            Some(v) => {
                return Err(StixelError::Format(format!(
                    "calibration field R must hold 9 numbers, got {}",
                    v.len()
                )))
            }
        };
        let translation = match &self.t {
            None => Vector3::zeros(),
            Some(v) if v.len() == 3 => Vector3::from_row_slice(v),
            Some(v) => {
                return Err(StixelError::Format(format!(
                    "calibration field t must hold 3 numbers, got {}",
                    v.len()
                )))
            }
        };
        CameraCalib::new(
            self.fx,
            self.fy,
            self.cx,
            self.cy,
            rotation,
            translation,
            self.width,
            self.height,
        )
    }
}

/// Project a world-frame point onto the image plane. Returns `(u, v, w)`
/// where `w` is the depth along the optical axis.
pub fn project_point(calib: &CameraCalib, p: &Vector3<f64>) -> Result<(f64, f64, f64)> {
    let cam = calib.world_to_camera(p);
    if cam.z <= 0.0 {
        return Err(StixelError::BehindCamera { z: cam.z });
    }
    let u = calib.fx * cam.x / cam.z + calib.cx;
    let v = calib.fy * cam.y / cam.z + calib.cy;
    Ok((u, v, cam.z))
}

/// Invert [`project_point`]: map image coordinates plus depth back to a
/// world-frame point.
pub fn backproject_point(calib: &CameraCalib, u: f64, v: f64, w: f64) -> Result<Vector3<f64>> {
    if w <= 0.0 {
        return Err(StixelError::Range(format!(
            "backprojection depth must be positive, got {w}"
        )));
    }
    let cam = Vector3::new(
        (u - calib.cx) * w / calib.fx,
        (v - calib.cy) * w / calib.fy,
        w,
    );
    Ok(calib.camera_to_world(&cam))
}

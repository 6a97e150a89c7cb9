//! Toolkit for the Stixel World scene representation.
//!
//! A Stixel is a vertical image stick of fixed pixel width carrying one
//! metric depth; the set of stixels for a frame forms a compact intermediate
//! scene representation between 3D bounding boxes and pixel-wise depth.
//! This crate implements everything around the representation:
//!
//! - [`calib`] — pinhole projection and back-projection with extrinsics.
//! - [`grid`] — linear and tangential depth discretization.
//! - [`stixel`] — the data model and 3D segment realization.
//! - [`gt`] — automatic ground-truth generation from LiDAR point clouds,
//!   both holistic (everything above ground) and bounding-box driven.
//! - [`tensor`] — decoding raw network output tensors by probability
//!   thresholding.
//! - [`loss`] — reference loss functions, including the depth-weighted
//!   binary cross-entropy.
//! - [`eval`] — precision/recall against 3D boxes, F1 threshold sweeps and
//!   2D segmentation IoU.
//! - [`cluster`] — DBSCAN grouping of stixels into objects.
//! - [`wire`] — a compact binary wire format (24-byte header + 9 bytes per
//!   stixel) and a lossless JSON interchange format.

pub mod calib;
pub mod cluster;
pub mod error;
pub mod eval;
pub mod grid;
pub mod gt;
pub mod loss;
pub mod stixel;
pub mod tensor;
pub mod wire;

pub use calib::{backproject_point, project_point, CameraCalib};
pub use error::{Result, StixelError};
pub use grid::{calibrate_tangential_a, DepthGrid, GridKind};
pub use stixel::{stixel_to_segment3d, ObjectClass, Segment3D, Stixel, StixelWorld};

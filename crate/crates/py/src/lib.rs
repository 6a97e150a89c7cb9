//! Python bindings: a thin veneer over the core types and operations.
//!
//! Build the extension with `cargo build -p stixel-py --release`; the
//! produced `libstixelpy.so` imports as the module `stixelpy` once
//! renamed to `stixelpy.so` (see `python/smoke_test.py`).

use nalgebra::{Matrix3, Vector3};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use stixel_core::cluster::{cluster as cluster_impl, ClusterParams};
use stixel_core::eval::{precision_recall as pr_impl, Box3D, EvalConfig};
use stixel_core::gt::{generate_holistic as holistic_impl, GenerationConfig, PointCloud};
use stixel_core::tensor::{decode as decode_impl, PredictionTensor};
use stixel_core::{
    backproject_point, grid, loss, project_point, wire, CameraCalib, DepthGrid, GridKind,
    ObjectClass, StixelError,
};

fn py_err(e: StixelError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_class(name: &str) -> PyResult<ObjectClass> {
    match name.to_ascii_lowercase().as_str() {
        "vehicle" => Ok(ObjectClass::Vehicle),
        "pedestrian" => Ok(ObjectClass::Pedestrian),
        "cyclist" => Ok(ObjectClass::Cyclist),
        "sign" => Ok(ObjectClass::Sign),
        "other" => Ok(ObjectClass::Other),
        other => Err(PyValueError::new_err(format!("unknown class {other:?}"))),
    }
}

fn class_name(class: ObjectClass) -> &'static str {
    match class {
        ObjectClass::Vehicle => "vehicle",
        ObjectClass::Pedestrian => "pedestrian",
        ObjectClass::Cyclist => "cyclist",
        ObjectClass::Sign => "sign",
        ObjectClass::Other => "other",
    }
}

/// Pinhole camera calibration.
#[pyclass(name = "Calib", from_py_object)]
#[derive(Clone)]
struct PyCalib {
    inner: CameraCalib,
}

#[pymethods]
impl PyCalib {
    #[new]
    #[pyo3(signature = (fx, fy, cx, cy, width, height, r=None, t=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        r: Option<Vec<f64>>,
        t: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let rotation = match r {
            None => Matrix3::identity(),
            Some(v) if v.len() == 9 => Matrix3::from_row_slice(&v),
            Some(v) => {
                return Err(PyValueError::new_err(format!(
                    "r must hold 9 numbers, got {}",
                    v.len()
                )))
            }
        };
        let translation = match t {
            None => Vector3::zeros(),
            Some(v) if v.len() == 3 => Vector3::from_row_slice(&v),
            Some(v) => {
                return Err(PyValueError::new_err(format!(
                    "t must hold 3 numbers, got {}",
                    v.len()
                )))
            }
        };
        CameraCalib::new(fx, fy, cx, cy, rotation, translation, width, height)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// A camera looking along world +x with z up (automotive mounting).
    #[staticmethod]
    fn forward_facing(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        cam_height: f64,
    ) -> PyResult<Self> {
        CameraCalib::forward_facing(fx, fy, cx, cy, width, height, cam_height)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CameraCalib::from_json(text)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    /// World point to (u, v, w).
    fn project(&self, x: f64, y: f64, z: f64) -> PyResult<(f64, f64, f64)> {
        project_point(&self.inner, &Vector3::new(x, y, z)).map_err(py_err)
    }

    /// Image coordinates plus depth back to a world point.
    fn backproject(&self, u: f64, v: f64, w: f64) -> PyResult<(f64, f64, f64)> {
        backproject_point(&self.inner, u, v, w)
            .map(|p| (p.x, p.y, p.z))
            .map_err(py_err)
    }

    #[getter]
    fn fx(&self) -> f64 {
        self.inner.fx
    }

    #[getter]
    fn fy(&self) -> f64 {
        self.inner.fy
    }

    #[getter]
    fn width(&self) -> u32 {
        self.inner.img_width
    }

    #[getter]
    fn height(&self) -> u32 {
        self.inner.img_height
    }
}

/// Depth discretization grid.
#[pyclass(name = "Grid", from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: DepthGrid,
}

#[pymethods]
impl PyGrid {
    #[staticmethod]
    fn linear(n_bins: usize, d_min: f64, d_max: f64) -> PyResult<Self> {
        DepthGrid::linear(n_bins, d_min, d_max)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn tangential(n_bins: usize, d_min: f64, d_max: f64, a: f64) -> PyResult<Self> {
        DepthGrid::tangential(n_bins, d_min, d_max, a)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// The 64-bin tangential default with the frozen tangent factor.
    #[staticmethod]
    fn default_tangential() -> Self {
        Self {
            inner: DepthGrid::default_tangential(),
        }
    }

    /// Smallest tangent factor placing exactly `target_count` anchors at
    /// or below `target_depth`.
    #[staticmethod]
    fn calibrate_a(
        n_bins: usize,
        d_min: f64,
        d_max: f64,
        target_count: usize,
        target_depth: f64,
    ) -> PyResult<f64> {
        grid::calibrate_tangential_a(n_bins, d_min, d_max, target_count, target_depth)
            .map_err(py_err)
    }

    #[getter]
    fn anchors(&self) -> Vec<f64> {
        self.inner.anchors().to_vec()
    }

    #[getter]
    fn n_bins(&self) -> usize {
        self.inner.n_bins()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            GridKind::Linear => "linear",
            GridKind::Tangential => "tangential",
        }
    }

    fn depth_to_bin(&self, depth: f64) -> PyResult<usize> {
        self.inner.depth_to_bin(depth).map_err(py_err)
    }

    fn bin_to_depth(&self, bin: usize) -> PyResult<f64> {
        self.inner.bin_to_depth(bin).map_err(py_err)
    }
}

/// One vertical stick.
#[pyclass(name = "Stixel", from_py_object)]
#[derive(Clone)]
struct PyStixel {
    inner: stixel_core::Stixel,
}

#[pymethods]
impl PyStixel {
    #[new]
    #[pyo3(signature = (col, v_top, v_bot, depth, prob, width_px=8, label=None))]
    fn new(
        col: u16,
        v_top: u16,
        v_bot: u16,
        depth: f64,
        prob: f64,
        width_px: u16,
        label: Option<&str>,
    ) -> PyResult<Self> {
        let mut s = stixel_core::Stixel::new(col, v_top, v_bot, depth, prob);
        s.width_px = width_px;
        if let Some(name) = label {
            s.label = Some(parse_class(name)?);
        }
        Ok(Self { inner: s })
    }

    #[getter]
    fn col(&self) -> u16 {
        self.inner.col
    }

    #[getter]
    fn v_top(&self) -> u16 {
        self.inner.v_top
    }

    #[getter]
    fn v_bot(&self) -> u16 {
        self.inner.v_bot
    }

    #[getter]
    fn depth(&self) -> f64 {
        self.inner.depth
    }

    #[getter]
    fn prob(&self) -> f64 {
        self.inner.prob
    }

    #[getter]
    fn label(&self) -> Option<&'static str> {
        self.inner.label.map(class_name)
    }

    fn __repr__(&self) -> String {
        format!(
            "Stixel(col={}, v_top={}, v_bot={}, depth={:.3}, prob={:.3})",
            self.inner.col, self.inner.v_top, self.inner.v_bot, self.inner.depth, self.inner.prob
        )
    }
}

/// A frame's stixels plus calibration and grid.
#[pyclass(name = "World")]
struct PyWorld {
    inner: stixel_core::StixelWorld,
}

#[pymethods]
impl PyWorld {
    #[new]
    #[pyo3(signature = (calib, grid, frame_id=""))]
    fn new(calib: PyCalib, grid: PyGrid, frame_id: &str) -> Self {
        Self {
            inner: stixel_core::StixelWorld::new(calib.inner, grid.inner, frame_id),
        }
    }

    fn add(&mut self, stixel: PyStixel) {
        self.inner.stixels.push(stixel.inner);
    }

    #[getter]
    fn stixels(&self) -> Vec<PyStixel> {
        self.inner
            .stixels
            .iter()
            .map(|s| PyStixel { inner: s.clone() })
            .collect()
    }

    #[getter]
    fn frame_id(&self) -> String {
        self.inner.frame_id.clone()
    }

    fn __len__(&self) -> usize {
        self.inner.stixels.len()
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(py_err)
    }

    fn to_json(&self) -> PyResult<String> {
        wire::to_json(&self.inner).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        wire::from_json(text)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// Compact binary encoding (24-byte header + 9 bytes per stixel).
    fn encode<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyBytes>> {
        let bytes = wire::encode(&self.inner).map_err(py_err)?;
        Ok(pyo3::types::PyBytes::new(py, &bytes))
    }

    /// Decode a binary frame, reattaching the out-of-band calibration.
    #[staticmethod]
    #[pyo3(signature = (data, calib, frame_id=""))]
    fn decode(data: &[u8], calib: PyCalib, frame_id: &str) -> PyResult<Self> {
        wire::decode(data)
            .and_then(|frame| frame.into_world(calib.inner, frame_id))
            .map(|inner| Self { inner })
            .map_err(py_err)
    }
}

/// Oriented 3D box annotation.
#[pyclass(name = "Box", from_py_object)]
#[derive(Clone)]
struct PyBox {
    inner: Box3D,
}

#[pymethods]
impl PyBox {
    #[new]
    #[allow(clippy::too_many_arguments)]
    fn new(
        cx: f64,
        cy: f64,
        cz: f64,
        length: f64,
        width: f64,
        height: f64,
        yaw: f64,
        class: &str,
        num_lidar_points: u32,
    ) -> PyResult<Self> {
        Box3D::new(
            cx,
            cy,
            cz,
            length,
            width,
            height,
            yaw,
            parse_class(class)?,
            num_lidar_points,
        )
        .map(|inner| Self { inner })
        .map_err(py_err)
    }

    fn contains(&self, x: f64, y: f64, z: f64) -> bool {
        self.inner.contains(&Vector3::new(x, y, z))
    }
}

/// Decode a tensor file into a world; returns the world and the number of
/// degenerate cells dropped.
#[pyfunction]
fn decode_tensor(
    path: &str,
    calib: PyCalib,
    grid: PyGrid,
    threshold: f64,
) -> PyResult<(PyWorld, usize)> {
    let tensor = PredictionTensor::load(std::path::Path::new(path)).map_err(py_err)?;
    let (world, summary) =
        decode_impl(&tensor, &calib.inner, &grid.inner, threshold).map_err(py_err)?;
    Ok((PyWorld { inner: world }, summary.dropped_degenerate))
}

/// Generate holistic ground truth from raw points (world frame: x
/// forward, y left, z up).
#[pyfunction]
#[pyo3(signature = (points, calib, grid, z_thresh=0.3, cell_size=2.0, min_points=3))]
fn generate_holistic(
    points: Vec<(f64, f64, f64)>,
    calib: PyCalib,
    grid: PyGrid,
    z_thresh: f64,
    cell_size: f64,
    min_points: usize,
) -> PyResult<PyWorld> {
    let cloud = PointCloud::new(
        points
            .into_iter()
            .map(|(x, y, z)| Vector3::new(x, y, z))
            .collect(),
    )
    .map_err(py_err)?;
    let config = GenerationConfig {
        z_gradient_thresh: z_thresh,
        ground_cell_size: cell_size,
        min_points_per_stixel: min_points,
        ..Default::default()
    };
    holistic_impl(&cloud, &calib.inner, &grid.inner, &config)
        .map(|inner| PyWorld { inner })
        .map_err(py_err)
}

/// Precision and recall of a world against box annotations; returns
/// (precision, recall, approved, predicted, hit, relevant).
#[pyfunction]
#[pyo3(signature = (world, boxes, max_range=75.0, fov_deg=25.2, inside_fraction=0.5, samples=11))]
fn precision_recall(
    world: &PyWorld,
    boxes: Vec<PyBox>,
    max_range: f64,
    fov_deg: f64,
    inside_fraction: f64,
    samples: usize,
) -> PyResult<(f64, f64, usize, usize, usize, usize)> {
    let config = EvalConfig {
        max_range_m: max_range,
        fov_deg,
        inside_fraction,
        height_samples: samples,
        ..Default::default()
    };
    let boxes: Vec<Box3D> = boxes.into_iter().map(|b| b.inner).collect();
    let (p, r, counts) = pr_impl(&world.inner, &boxes, &config).map_err(py_err)?;
    Ok((p, r, counts.approved, counts.predicted, counts.hit, counts.relevant))
}

/// DBSCAN over stixel footprints; returns per-stixel cluster ids (None is
/// noise) and per-cluster (id, min, max, count, mean_prob) extents.
#[pyfunction]
#[pyo3(signature = (world, eps=1.5, min_pts=3))]
#[allow(clippy::type_complexity)]
fn cluster(
    world: &PyWorld,
    eps: f64,
    min_pts: usize,
) -> PyResult<(
    Vec<Option<usize>>,
    Vec<(usize, (f64, f64, f64), (f64, f64, f64), usize, f64)>,
)> {
    let params = ClusterParams {
        eps,
        min_pts,
        ..Default::default()
    };
    let set = cluster_impl(&world.inner, &params).map_err(py_err)?;
    let extents = set
        .clusters
        .iter()
        .enumerate()
        .map(|(id, c)| {
            (
                id,
                (c.min[0], c.min[1], c.min[2]),
                (c.max[0], c.max[1], c.max[2]),
                c.members.len(),
                c.mean_prob,
            )
        })
        .collect();
    Ok((set.assignment, extents))
}

#[pyfunction]
fn mse(pred: Vec<f64>, target: Vec<f64>) -> PyResult<f64> {
    loss::mse(&pred, &target).map_err(py_err)
}

#[pyfunction]
fn bce(pred: Vec<f64>, target: Vec<f64>) -> PyResult<f64> {
    loss::bce(&pred, &target).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (d, alpha_min=1.0, alpha_max=2.0, d_min=4.0, d_max=66.0))]
fn depth_weight(d: f64, alpha_min: f64, alpha_max: f64, d_min: f64, d_max: f64) -> PyResult<f64> {
    let weights = loss::LossWeights {
        alpha_min,
        alpha_max,
        d_min,
        d_max,
        ..Default::default()
    };
    loss::depth_weight(d, &weights).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (pred, target, depths, alpha_min=1.0, alpha_max=2.0, d_min=4.0, d_max=66.0))]
#[allow(clippy::too_many_arguments)]
fn wbce(
    pred: Vec<f64>,
    target: Vec<f64>,
    depths: Vec<f64>,
    alpha_min: f64,
    alpha_max: f64,
    d_min: f64,
    d_max: f64,
) -> PyResult<f64> {
    let weights = loss::LossWeights {
        alpha_min,
        alpha_max,
        d_min,
        d_max,
        ..Default::default()
    };
    loss::wbce(&pred, &target, &depths, &weights).map_err(py_err)
}

#[pymodule]
fn stixelpy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCalib>()?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyStixel>()?;
    m.add_class::<PyWorld>()?;
    m.add_class::<PyBox>()?;
    m.add_function(wrap_pyfunction!(decode_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(generate_holistic, m)?)?;
    m.add_function(wrap_pyfunction!(precision_recall, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(bce, m)?)?;
    m.add_function(wrap_pyfunction!(depth_weight, m)?)?;
    m.add_function(wrap_pyfunction!(wbce, m)?)?;
    Ok(())
}

//! Shared fixtures and independent reference implementations ("oracles")
//! for the integration and acceptance suites. Everything here is written
//! from first principles — no calls into the code paths under test beyond
//! plain data construction.

#![allow(dead_code)]

use nalgebra::Vector3;
use rand::Rng;

use stixel_core::eval::{Box3D, EvalConfig};
use stixel_core::{CameraCalib, DepthGrid, Stixel, StixelWorld};

pub const IMG_W: u32 = 1920;
pub const IMG_H: u32 = 1280;
pub const FX: f64 = 2000.0;
pub const FY: f64 = 2000.0;
pub const CX: f64 = 960.0;
pub const CY: f64 = 640.0;
pub const CAM_HEIGHT: f64 = 2.0;

/// The forward-facing test camera: world x forward, y left, z up.
pub fn forward_calib() -> CameraCalib {
    CameraCalib::forward_facing(FX, FY, CX, CY, IMG_W, IMG_H, CAM_HEIGHT).unwrap()
}

// ---------------------------------------------------------------------
// Synthetic LiDAR scenes
// ---------------------------------------------------------------------

/// Dense flat ground plane at z = 0 covering x in [4, 40], y in [-10, 10].
pub fn plane_points() -> Vec<Vector3<f64>> {
    let mut pts = Vec::new();
    for xi in 0..=180 {
        for yi in 0..=100 {
            pts.push(Vector3::new(
                4.0 + xi as f64 * 0.2,
                -10.0 + yi as f64 * 0.2,
                0.0,
            ));
        }
    }
    pts
}

/// Frontal wall at x = 10 m whose projection spans stixel columns 40..=60.
pub fn wall_points() -> Vec<Vector3<f64>> {
    let mut pts = Vec::new();
    for yi in 0..42 {
        for zi in 0..41 {
            pts.push(Vector3::new(
                10.0,
                2.3605 + yi as f64 * 0.02,
                0.5 + zi as f64 * 0.05,
            ));
        }
    }
    pts
}

// ---------------------------------------------------------------------
// Geometry helpers for building stixels in world terms
// ---------------------------------------------------------------------

/// Build a stixel under [`forward_calib`] whose segment spans world
/// z in [z_lo, z_hi] on the column ray nearest lateral offset `y` at
/// `depth` (world x). Returns the stixel and its snapped ray's actual
/// lateral offset.
pub fn stixel_spanning(depth: f64, y: f64, z_lo: f64, z_hi: f64) -> (Stixel, f64) {
    let u = FX * (-y) / depth + CX;
    let col = (u / 8.0).floor().clamp(0.0, 239.0) as u16;
    let center_u = f64::from(col) * 8.0 + 4.0;
    let actual_y = -(center_u - CX) / FX * depth;
    let v_of = |z: f64| (FY * (CAM_HEIGHT - z) / depth + CY).round().clamp(0.0, f64::from(IMG_H));
    let (v_top, v_bot) = (v_of(z_hi) as u16, v_of(z_lo) as u16);
    (Stixel::new(col, v_top, v_bot, depth, 0.9), actual_y)
}

/// World-frame endpoints of a stixel's segment under [`forward_calib`],
/// computed from first principles rather than through the library.
pub fn segment_endpoints(s: &Stixel) -> (Vector3<f64>, Vector3<f64>) {
    let u = f64::from(s.col) * 8.0 + 4.0;
    let point_of = |v: f64| {
        let x_cam = (u - CX) / FX * s.depth;
        let y_cam = (v - CY) / FY * s.depth;
        // Forward-facing frame: world = (depth, -x_cam, cam_height - y_cam).
        Vector3::new(s.depth, -x_cam, CAM_HEIGHT - y_cam)
    };
    (point_of(f64::from(s.v_top)), point_of(f64::from(s.v_bot)))
}

// ---------------------------------------------------------------------
// Analytic segment-in-box oracle
// ---------------------------------------------------------------------

/// Exact fraction of the segment [a, b] inside the box, by clipping the
/// parametric line against the three local slabs.
pub fn analytic_inside_fraction(a: &Vector3<f64>, b: &Vector3<f64>, bx: &Box3D) -> f64 {
    let (s, c) = bx.yaw.sin_cos();
    let local = |p: &Vector3<f64>| {
        let d = p - Vector3::new(bx.cx, bx.cy, bx.cz);
        Vector3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
    };
    let la = local(a);
    let lb = local(b);
    let dl = lb - la;
    let halves = [bx.length / 2.0, bx.width / 2.0, bx.height / 2.0];

    let mut t_lo = 0.0f64;
    let mut t_hi = 1.0f64;
    for axis in 0..3 {
        let (p0, dp, h) = (la[axis], dl[axis], halves[axis]);
        if dp.abs() < 1e-15 {
            if p0.abs() > h {
                return 0.0;
            }
            continue;
        }
        let t1 = (-h - p0) / dp;
        let t2 = (h - p0) / dp;
        t_lo = t_lo.max(t1.min(t2));
        t_hi = t_hi.min(t1.max(t2));
        if t_lo >= t_hi {
            return 0.0;
        }
    }
    (t_hi - t_lo).max(0.0)
}

// ---------------------------------------------------------------------
// Brute-force precision/recall oracle
// ---------------------------------------------------------------------

pub struct OracleCounts {
    pub approved: usize,
    pub predicted: usize,
    pub hit: usize,
    pub relevant: usize,
    pub precision: f64,
    pub recall: f64,
    /// Per-stixel approval decisions, aligned with the input order.
    pub approvals: Vec<bool>,
}

/// Count approvals and hits with analytic fractions and plain loops.
pub fn oracle_precision_recall(
    stixels: &[Stixel],
    boxes: &[Box3D],
    config: &EvalConfig,
) -> OracleCounts {
    let relevant: Vec<&Box3D> = boxes
        .iter()
        .filter(|b| {
            b.class != stixel_core::ObjectClass::Sign
                && b.num_lidar_points >= 1
                && (b.cx * b.cx + b.cy * b.cy + b.cz * b.cz).sqrt() <= config.max_range_m
                && b.cx > 0.0
                && b.cy.abs().atan2(b.cx).to_degrees() <= config.fov_deg
        })
        .collect();
    let mut approvals = Vec::with_capacity(stixels.len());
    let mut hit = vec![false; relevant.len()];
    for s in stixels {
        let (a, b) = segment_endpoints(s);
        let mut approved = false;
        for (bi, bx) in relevant.iter().enumerate() {
            if analytic_inside_fraction(&a, &b, bx) >= config.inside_fraction {
                approved = true;
                hit[bi] = true;
            }
        }
        approvals.push(approved);
    }
    let approved = approvals.iter().filter(|a| **a).count();
    let hits = hit.iter().filter(|h| **h).count();
    let precision = if stixels.is_empty() {
        1.0
    } else {
        approved as f64 / stixels.len() as f64
    };
    let recall = if relevant.is_empty() {
        1.0
    } else {
        hits as f64 / relevant.len() as f64
    };
    OracleCounts {
        approved,
        predicted: stixels.len(),
        hit: hits,
        relevant: relevant.len(),
        precision,
        recall,
        approvals,
    }
}

// ---------------------------------------------------------------------
// Brute-force DBSCAN oracle
// ---------------------------------------------------------------------

/// Classic DBSCAN with O(n^2) neighborhoods: cores are connected
/// components under the eps-relation (ids assigned in lexicographic
/// coordinate order), borders attach to the lowest id among their core
/// neighbors, the rest is noise.
pub fn oracle_dbscan(points: &[[f64; 2]], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let eps2 = eps * eps;
    let near = |i: usize, j: usize| {
        let dx = points[i][0] - points[j][0];
        let dy = points[i][1] - points[j][1];
        dx * dx + dy * dy <= eps2
    };
    let neighbor_count =
        |i: usize| -> usize { (0..n).filter(|j| near(i, *j)).count() };
    let core: Vec<bool> = (0..n).map(|i| neighbor_count(i) >= min_pts).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| {
        points[*a][0]
            .total_cmp(&points[*b][0])
            .then(points[*a][1].total_cmp(&points[*b][1]))
    });

    let mut assignment: Vec<Option<usize>> = vec![None; n];
    let mut next = 0usize;
    for &seed in &order {
        if !core[seed] || assignment[seed].is_some() {
            continue;
        }
        let id = next;
        next += 1;
        let mut stack = vec![seed];
        assignment[seed] = Some(id);
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if core[j] && assignment[j].is_none() && near(i, j) {
                    assignment[j] = Some(id);
                    stack.push(j);
                }
            }
        }
    }
    for i in 0..n {
        if !core[i] && assignment[i].is_none() {
            assignment[i] = (0..n)
                .filter(|j| core[*j] && near(i, *j))
                .filter_map(|j| assignment[j])
                .min();
        }
    }
    assignment
}

/// Relabel cluster ids by first appearance so partitions compare up to
/// renaming.
pub fn canonical_partition(assignment: &[Option<usize>]) -> Vec<Option<usize>> {
    let mut rename = std::collections::HashMap::new();
    let mut next = 0usize;
    assignment
        .iter()
        .map(|a| {
            a.map(|id| {
                *rename.entry(id).or_insert_with(|| {
                    let v = next;
                    next += 1;
                    v
                })
            })
        })
        .collect()
}

// ---------------------------------------------------------------------
// Random instance builders
// ---------------------------------------------------------------------

/// A random world of blob-structured stixels for clustering tests.
pub fn random_cluster_world<R: Rng>(rng: &mut R, max_stixels: usize) -> StixelWorld {
    let calib = forward_calib();
    let mut world = StixelWorld::new(calib, DepthGrid::default_linear(), "random");
    let n = rng.random_range(0..=max_stixels);
    let n_blobs = rng.random_range(1..=6usize);
    let centers: Vec<(f64, f64)> = (0..n_blobs)
        .map(|_| {
            let depth = rng.random_range(6.0..55.0);
            let lateral = rng.random_range(-0.4 * depth..0.4 * depth);
            (lateral, depth)
        })
        .collect();
    for _ in 0..n {
        let (lateral, depth) = if rng.random_bool(0.85) {
            let (cx, cd) = centers[rng.random_range(0..n_blobs)];
            (
                cx + rng.random_range(-1.0..1.0),
                (cd + rng.random_range(-1.0..1.0)).clamp(4.5, 65.0),
            )
        } else {
            let depth = rng.random_range(5.0..60.0);
            (rng.random_range(-0.4 * depth..0.4 * depth), depth)
        };
        let u = (FX * (-lateral) / depth + CX).clamp(0.0, 1919.0);
        let col = (u / 8.0).floor() as u16;
        let v_top = rng.random_range(0..1200u16);
        let v_bot = rng.random_range(v_top + 1..=1280u16);
        world
            .stixels
            .push(Stixel::new(col, v_top, v_bot, depth, rng.random_range(0.0..1.0)));
    }
    world
}

// ---------------------------------------------------------------------
// Golden wire fixtures
// ---------------------------------------------------------------------

/// The three deterministic worlds frozen as golden wire files under
/// `tests/golden/`.
pub fn golden_worlds() -> Vec<(&'static str, StixelWorld)> {
    let calib = CameraCalib::with_identity_extrinsics(FX, FY, CX, CY, IMG_W, IMG_H).unwrap();

    let empty = StixelWorld::new(calib.clone(), DepthGrid::default_linear(), "golden-empty");

    let mut small = StixelWorld::new(calib.clone(), DepthGrid::default_linear(), "golden-small");
    small.stixels = vec![
        Stixel::new(0, 100, 200, 4.0, 0.0),
        Stixel::new(100, 320, 640, 9.8125, 0.9).with_label(stixel_core::ObjectClass::Vehicle),
        Stixel::new(239, 1000, 1280, 65.9, 1.0).with_label(stixel_core::ObjectClass::Cyclist),
    ];

    let mut mixed = StixelWorld::new(calib, DepthGrid::default_tangential(), "golden-mixed");
    for i in 0..50u16 {
        let k = f64::from(i);
        let v_top = 100 + i * 20;
        let mut s = Stixel::new(
            (i * 7 + 3) % 240,
            v_top,
            v_top + 40 + i * 2,
            4.0 + k * 1.2,
            (0.02 * k).min(1.0),
        );
        s.label = stixel_core::ObjectClass::from_code((i % 6) as u8); // every 6th unlabeled
        mixed.stixels.push(s);
    }

    vec![
        ("golden_empty.stx1", empty),
        ("golden_small.stx1", small),
        ("golden_mixed.stx1", mixed),
    ]
}

pub fn golden_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Random valid world for wire round-trips: arbitrary columns, rows,
/// depths and labels over the default linear grid.
pub fn random_wire_world<R: Rng>(rng: &mut R, max_stixels: usize) -> StixelWorld {
    let calib =
        CameraCalib::with_identity_extrinsics(FX, FY, CX, CY, IMG_W, IMG_H).unwrap();
    let mut world = StixelWorld::new(calib, DepthGrid::default_linear(), "wire");
    for _ in 0..rng.random_range(0..=max_stixels) {
        let v_top = rng.random_range(0..1279u16);
        let v_bot = rng.random_range(v_top + 1..=1280u16);
        let mut s = Stixel::new(
            rng.random_range(0..240u16),
            v_top,
            v_bot,
            rng.random_range(4.0..=66.0),
            rng.random_range(0.0..=1.0),
        );
        if rng.random_bool(0.3) {
            s.label = stixel_core::ObjectClass::from_code(rng.random_range(0..5u8));
        }
        world.stixels.push(s);
    }
    world
}

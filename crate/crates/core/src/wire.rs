//! Compact binary serialization of stixel worlds, plus a lossless JSON
//! interchange format.
//!
//! The binary frame is built for bandwidth-limited links: a 24-byte header
//! followed by exactly 9 bytes per stixel, little-endian throughout, with
//! no varints so stixel `k` sits at a fixed offset. Depth is quantized to
//! 16 bits over the grid's `[d_min, d_max]` (worst-case error `(d_max -
//! d_min) / 2^16 / 2`, under half a millimeter for the default range) and
//! probability to 8 bits (error at most 1/510).
//!
//! Header: magic `STX1`, u8 version = 1, u16 bin count, f32 d_min, f32
//! d_max, u8 grid kind (0 linear, 1 tangential), u16 image width, u16
//! image height, u32 stixel count.
//! Per stixel: u8 column, u16 top row, u16 bottom row, u16 quantized
//! depth, u8 quantized probability, u8 label (255 = unlabeled).
//!
//! Version 1 constraints: at most 256 columns, 8-px stixels, and
//! tangential grids travel without their tangent factor (decoding assumes
//! the default). Camera calibration and the frame id are static per
//! sensor and travel out of band; [`WireFrame::into_world`] reattaches
//! them.

use serde::{Deserialize, Serialize};

use crate::calib::{CalibJson, CameraCalib};
use crate::error::{Result, StixelError};
use crate::grid::{DepthGrid, GridKind, DEFAULT_TANGENT_FACTOR};
use crate::stixel::{ObjectClass, Stixel, StixelWorld, DEFAULT_STIXEL_WIDTH};

pub const WIRE_MAGIC: &[u8; 4] = b"STX1";
pub const WIRE_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 24;
pub const STIXEL_LEN: usize = 9;
const LABEL_NONE: u8 = 255;

/// Encoded frame size in bytes for a given stixel count.
pub fn encoded_len(n_stixels: usize) -> usize {
    HEADER_LEN + STIXEL_LEN * n_stixels
}

/// A decoded binary frame: everything the wire carries. Reattach the
/// out-of-band calibration with [`WireFrame::into_world`].
#[derive(Debug, Clone, PartialEq)]
pub struct WireFrame {
    pub grid: DepthGrid,
    pub img_width: u16,
    pub img_height: u16,
    pub stixels: Vec<Stixel>,
}

impl WireFrame {
    pub fn into_world(
        self,
        calib: CameraCalib,
        frame_id: impl Into<String>,
    ) -> Result<StixelWorld> {
        if calib.img_width != u32::from(self.img_width)
            || calib.img_height != u32::from(self.img_height)
        {
            return Err(StixelError::Config(format!(
                "calibration image size {}x{} does not match the encoded frame {}x{}",
                calib.img_width, calib.img_height, self.img_width, self.img_height
            )));
        }
        let world = StixelWorld {
            stixels: self.stixels,
            calib,
            grid: self.grid,
            frame_id: frame_id.into(),
        };
        world
            .validate()
            .map_err(|e| StixelError::Format(format!("decoded frame is inconsistent: {e}")))?;
        Ok(world)
    }
}

fn quantize_depth(depth: f64, d_min: f64, d_max: f64) -> u16 {
    let t = (depth - d_min) / (d_max - d_min);
    ((t * 65536.0).floor() as i64).clamp(0, 65535) as u16
}

fn dequantize_depth(q: u16, d_min: f64, d_max: f64) -> f64 {
    d_min + (f64::from(q) + 0.5) / 65536.0 * (d_max - d_min)
}

fn quantize_prob(p: f64) -> u8 {
    (p * 255.0).round() as u8
}

fn dequantize_prob(q: u8) -> f64 {
    f64::from(q) / 255.0
}

/// Encode a world into the binary wire format.
pub fn encode(world: &StixelWorld) -> Result<Vec<u8>> {
    let grid = &world.grid;
    let count = u32::try_from(world.stixels.len()).map_err(|_| {
        StixelError::Capacity(format!("{} stixels exceed u32", world.stixels.len()))
    })?;
    let n_bins = u16::try_from(grid.n_bins())
        .map_err(|_| StixelError::Capacity(format!("{} bins exceed u16", grid.n_bins())))?;
    let img_width = u16::try_from(world.calib.img_width).map_err(|_| {
        StixelError::Capacity(format!("image width {} exceeds u16", world.calib.img_width))
    })?;
    let img_height = u16::try_from(world.calib.img_height).map_err(|_| {
        StixelError::Capacity(format!(
            "image height {} exceeds u16",
            world.calib.img_height
        ))
    })?;

    let mut out = Vec::with_capacity(encoded_len(world.stixels.len()));
    out.extend_from_slice(WIRE_MAGIC);
    out.push(WIRE_VERSION);
    out.extend_from_slice(&n_bins.to_le_bytes());
    out.extend_from_slice(&(grid.d_min() as f32).to_le_bytes());
    out.extend_from_slice(&(grid.d_max() as f32).to_le_bytes());
    out.push(match grid.kind() {
        GridKind::Linear => 0,
        GridKind::Tangential => 1,
    });
    out.extend_from_slice(&img_width.to_le_bytes());
    out.extend_from_slice(&img_height.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());

    for (i, s) in world.stixels.iter().enumerate() {
        let col = u8::try_from(s.col).map_err(|_| {
            StixelError::Capacity(format!(
                "stixel {i}: column {} exceeds the format's 256-column limit",
                s.col
            ))
        })?;
        if s.width_px != DEFAULT_STIXEL_WIDTH {
            return Err(StixelError::Capacity(format!(
                "stixel {i}: width {} px is not representable (version 1 fixes 8 px)",
                s.width_px
            )));
        }
        out.push(col);
        out.extend_from_slice(&s.v_top.to_le_bytes());
        out.extend_from_slice(&s.v_bot.to_le_bytes());
        out.extend_from_slice(&quantize_depth(s.depth, grid.d_min(), grid.d_max()).to_le_bytes());
        out.push(quantize_prob(s.prob));
        out.push(s.label.map_or(LABEL_NONE, ObjectClass::code));
    }
    Ok(out)
}

/// Decode a binary wire frame.
pub fn decode(bytes: &[u8]) -> Result<WireFrame> {
    if bytes.len() < HEADER_LEN {
        return Err(StixelError::Format(format!(
            "truncated header: need {HEADER_LEN} bytes, input ends at byte {}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != WIRE_MAGIC {
        return Err(StixelError::Format(format!(
            "bad magic {:?} at byte 0, expected {:?}",
            &bytes[0..4],
            WIRE_MAGIC
        )));
    }
    if bytes[4] != WIRE_VERSION {
        return Err(StixelError::Format(format!(
            "unsupported version {} at byte 4, expected {WIRE_VERSION}",
            bytes[4]
        )));
    }
    let n_bins = u16::from_le_bytes(bytes[5..7].try_into().unwrap());
    let d_min = f64::from(f32::from_le_bytes(bytes[7..11].try_into().unwrap()));
    let d_max = f64::from(f32::from_le_bytes(bytes[11..15].try_into().unwrap()));
    let kind = bytes[15];
    let img_width = u16::from_le_bytes(bytes[16..18].try_into().unwrap());
    let img_height = u16::from_le_bytes(bytes[18..20].try_into().unwrap());
    let count = u32::from_le_bytes(bytes[20..24].try_into().unwrap()) as usize;

    let expected = encoded_len(count);
    if bytes.len() != expected {
        return Err(StixelError::Format(format!(
            "frame length mismatch: {count} stixels need {expected} bytes, input ends at byte {}",
            bytes.len()
        )));
    }
    let grid = match kind {
        0 => DepthGrid::linear(usize::from(n_bins), d_min, d_max)?,
        1 => DepthGrid::tangential(usize::from(n_bins), d_min, d_max, DEFAULT_TANGENT_FACTOR)?,
        other => {
            return Err(StixelError::Format(format!(
                "unknown grid kind {other} at byte 15"
            )))
        }
    };

    let mut stixels = Vec::with_capacity(count);
    for i in 0..count {
        let off = HEADER_LEN + i * STIXEL_LEN;
        let rec = &bytes[off..off + STIXEL_LEN];
        let label_byte = rec[8];
        let label = if label_byte == LABEL_NONE {
            None
        } else {
            Some(ObjectClass::from_code(label_byte).ok_or_else(|| {
                StixelError::Format(format!(
                    "unknown label code {label_byte} at byte {}",
                    off + 8
                ))
            })?)
        };
        stixels.push(Stixel {
            col: u16::from(rec[0]),
            v_top: u16::from_le_bytes(rec[1..3].try_into().unwrap()),
            v_bot: u16::from_le_bytes(rec[3..5].try_into().unwrap()),
            depth: dequantize_depth(
                u16::from_le_bytes(rec[5..7].try_into().unwrap()),
                d_min,
                d_max,
            ),
            prob: dequantize_prob(rec[7]),
            width_px: DEFAULT_STIXEL_WIDTH,
            label,
        });
    }
    Ok(WireFrame {
        grid,
        img_width,
        img_height,
        stixels,
    })
}

/// Versioned JSON schema for lossless interchange.
pub const JSON_SCHEMA: &str = "stixel-world/v1";

#[derive(Serialize, Deserialize)]
struct WorldJson {
    schema: String,
    frame_id: String,
    calib: CalibJson,
    grid: GridJson,
    stixels: Vec<Stixel>,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    kind: GridKind,
    n_bins: usize,
    d_min: f64,
    d_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
}

/// Serialize a world to the JSON interchange format. Round-trips exactly:
/// reals are emitted with shortest-round-trip formatting.
pub fn to_json(world: &StixelWorld) -> Result<String> {
    let doc = WorldJson {
        schema: JSON_SCHEMA.to_string(),
        frame_id: world.frame_id.clone(),
        calib: CalibJson::from_calib(&world.calib),
        grid: GridJson {
            kind: world.grid.kind(),
            n_bins: world.grid.n_bins(),
            d_min: world.grid.d_min(),
            d_max: world.grid.d_max(),
            a: world.grid.tangent_factor(),
        },
        stixels: world.stixels.clone(),
    };
    serde_json::to_string_pretty(&doc)
        .map_err(|e| StixelError::Format(format!("world serialization failed: {e}")))
}

/// Parse the JSON interchange format, validating schema and invariants.
pub fn from_json(text: &str) -> Result<StixelWorld> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc: WorldJson = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| StixelError::Format(format!("world file: {e}")))?;
    if doc.schema != JSON_SCHEMA {
        return Err(StixelError::Format(format!(
            "unsupported schema {:?}, expected {JSON_SCHEMA:?}",
            doc.schema
        )));
    }
    let grid = match doc.grid.kind {
        GridKind::Linear => DepthGrid::linear(doc.grid.n_bins, doc.grid.d_min, doc.grid.d_max)?,
        GridKind::Tangential => DepthGrid::tangential(
            doc.grid.n_bins,
            doc.grid.d_min,
            doc.grid.d_max,
            doc.grid.a.unwrap_or(DEFAULT_TANGENT_FACTOR),
        )?,
    };
    let world = StixelWorld {
        stixels: doc.stixels,
        calib: doc.calib.into_calib()?,
        grid,
        frame_id: doc.frame_id,
    };
    world.validate()?;
    Ok(world)
}

/// Load a world from a file, sniffing JSON versus binary by content.
pub fn load_world(path: &std::path::Path) -> Result<WorldOnDisk> {
    let bytes = std::fs::read(path)?;
    if bytes.starts_with(WIRE_MAGIC) {
        Ok(WorldOnDisk::Binary(decode(&bytes)?))
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| StixelError::Format("world file is neither binary nor UTF-8".into()))?;
        Ok(WorldOnDisk::Json(Box::new(from_json(&text)?)))
    }
}

/// A world file is either self-contained JSON or a binary frame awaiting
/// its calibration.
#[derive(Debug)]
pub enum WorldOnDisk {
    Json(Box<StixelWorld>),
    Binary(WireFrame),
}

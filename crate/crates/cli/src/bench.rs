//! `stixel bench` — latency measurement on random valid inputs.
//!
//! Mirrors a simple methodology: generate random inputs, run the
//! operation once per frame, report the mean and percentiles in
//! milliseconds as CSV on standard output. Input generation happens
//! outside the timed section.

use clap::{Args, ValueEnum};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use stixel_core::cluster::{cluster, ClusterParams};
use stixel_core::tensor::{decode, PredictionTensor};
use stixel_core::{CameraCalib, DepthGrid, Result, Stixel, StixelError, StixelWorld};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchMode {
    /// Threshold decoding of [3, 64, 240] tensors.
    Decode,
    /// DBSCAN over 2,000-stixel frames.
    Cluster,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub mode: BenchMode,
    /// Number of random frames to measure.
    #[arg(long, default_value_t = 1000)]
    pub frames: usize,
    /// Decode threshold used in decode mode.
    #[arg(long, default_value_t = 0.38)]
    pub threshold: f64,
}

pub fn run(args: &BenchArgs) -> Result<()> {
    if args.frames == 0 {
        return Err(StixelError::Config("--frames must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let samples_ms = match args.mode {
        BenchMode::Decode => bench_decode(args, &mut rng)?,
        BenchMode::Cluster => bench_cluster(args, &mut rng)?,
    };
    print_stats(&samples_ms);
    Ok(())
}

fn bench_decode(args: &BenchArgs, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let calib =
        CameraCalib::with_identity_extrinsics(2000.0, 2000.0, 960.0, 640.0, 1920, 1280)?;
    let grid = DepthGrid::default_linear();
    let mut samples = Vec::with_capacity(args.frames);
    for _ in 0..args.frames {
        let data: Vec<f32> = (0..3 * 64 * 240)
            .map(|_| rng.random_range(0.0..=1.0f32))
            .collect();
        let tensor = PredictionTensor::new(data, 64, 240, 1920, 1280)?;
        let start = std::time::Instant::now();
        let (world, _) = decode(&tensor, &calib, &grid, args.threshold)?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(world.stixels.len());
    }
    Ok(samples)
}

fn bench_cluster(args: &BenchArgs, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let calib =
        CameraCalib::with_identity_extrinsics(2000.0, 2000.0, 960.0, 640.0, 1920, 1280)?;
    let grid = DepthGrid::default_linear();
    let params = ClusterParams::default();
    let mut samples = Vec::with_capacity(args.frames);
    for _ in 0..args.frames {
        let mut world = StixelWorld::new(calib.clone(), grid.clone(), "bench");
        let n_blobs = rng.random_range(4..12usize);
        let centers: Vec<(f64, f64)> = (0..n_blobs)
            .map(|_| {
                let depth = rng.random_range(6.0..55.0);
                (rng.random_range(-0.4 * depth..0.4 * depth), depth)
            })
            .collect();
        while world.stixels.len() < 2000 {
            let (cx, cd) = centers[rng.random_range(0..n_blobs)];
            let depth = (cd + rng.random_range(-1.0..1.0)).clamp(4.5, 65.0);
            let lateral = cx + rng.random_range(-1.0..1.0);
            let u = (2000.0 * lateral / depth + 960.0).clamp(0.0, 1919.0);
            let v_top = rng.random_range(0..1200u16);
            world.stixels.push(Stixel::new(
                (u / 8.0).floor() as u16,
                v_top,
                rng.random_range(v_top + 1..=1280u16),
                depth,
                rng.random_range(0.0..1.0),
            ));
        }
        let start = std::time::Instant::now();
        let set = cluster(&world, &params)?;
        samples.push(start.elapsed().as_secs_f64() * 1e3);
        std::hint::black_box(set.clusters.len());
    }
    Ok(samples)
}

fn print_stats(samples_ms: &[f64]) {
    let mut sorted = samples_ms.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    let pct = |p: f64| sorted[((p * (sorted.len() - 1) as f64).round()) as usize];
    println!("statistic,milliseconds");
    println!("mean,{mean:.6}");
    println!("p50,{:.6}", pct(0.50));
    println!("p90,{:.6}", pct(0.90));
    println!("p99,{:.6}", pct(0.99));
    println!("min,{:.6}", sorted[0]);
    println!("max,{:.6}", sorted[sorted.len() - 1]);
}

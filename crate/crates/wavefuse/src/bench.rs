//! Timing harness over synthetic scenes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;
use wavefuse_core::tiling::plan_grid;
use wavefuse_core::{FusionMethod, MultibandImage, Plane};

use crate::cluster::{run_master, MasterConfig};
use crate::error::{Error, Result};
use crate::pad::pad_to_grid;
use crate::pool::fuse_tiled;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<(usize, usize)>,
    pub methods: Vec<FusionMethod>,
    pub grids: Vec<(usize, usize)>,
    /// Thread counts, or with `nodes` the number of leading endpoints used.
    pub workers: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub bands: usize,
    pub nodes: Option<Vec<String>>,
    pub master: MasterConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![(4070, 3736)],
            methods: Vec::new(),
            grids: vec![(2, 2)],
            workers: vec![1],
            reps: 3,
            seed: DEFAULT_SEED,
            bands: 3,
            nodes: None,
            master: MasterConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: &'static str,
    pub pan_w: usize,
    pub pan_h: usize,
    pub grid: (usize, usize),
    pub workers: usize,
    /// Median over the repetitions.
    pub wall_seconds: f64,
    pub megapixels_per_second: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

/// Smooth structure plus noise, PAN at full size and `bands` MS bands at
/// half size (rounded up).
pub fn synthetic_scene(width: usize, height: usize, bands: usize, seed: u64) -> (Plane, MultibandImage) {
    let mut rng = StdRng::seed_from_u64(seed);
    let (fx, fy) = (rng.random_range(0.01f32..0.05), rng.random_range(0.01f32..0.05));
    let pan = Plane::from_fn(width, height, |x, y| {
        let base = 128.0 + 80.0 * ((x as f32 * fx).sin() * (y as f32 * fy).cos());
        (base + rng.random_range(-20.0f32..20.0)).clamp(0.0, 255.0)
    });
    let (mw, mh) = (width.div_ceil(2), height.div_ceil(2));
    let ms = (0..bands)
        .map(|k| {
            let shift = 30.0 * k as f32;
            Plane::from_fn(mw, mh, |x, y| {
                let base = 100.0 + shift + 60.0 * ((x as f32 * fx * 2.0).cos() + (y as f32 * fy * 2.0).sin()) / 2.0;
                (base + rng.random_range(-10.0f32..10.0)).clamp(0.0, 255.0)
            })
        })
        .collect();
    (pan, MultibandImage::new(ms).expect("uniform synthetic bands"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.reps == 0 || cfg.methods.is_empty() || cfg.workers.contains(&0) {
        return Err(Error::Usage("bench needs reps, methods and worker counts above zero".into()));
    }
    if let Some(nodes) = &cfg.nodes {
        if cfg.workers.iter().any(|&k| k > nodes.len()) {
            return Err(Error::Usage("more workers requested than nodes given".into()));
        }
    }
    let mut report = BenchReport::default();
    for &(w, h) in &cfg.sizes {
        let (pan, ms) = synthetic_scene(w, h, cfg.bands, cfg.seed);
        for &(gw, gh) in &cfg.grids {
            let padded = pad_to_grid(pan.clone(), ms.clone(), gw, gh)?;
            let (pw, ph) = padded.pan.dims();
            let grid = plan_grid(pw, ph, gw, gh)?;
            for &method in &cfg.methods {
                method.validate(cfg.bands)?;
                for &workers in &cfg.workers {
                    let mut times = Vec::with_capacity(cfg.reps);
                    for _ in 0..cfg.reps {
                        let start = Instant::now();
                        let fused = match &cfg.nodes {
                            Some(nodes) => run_master(
                                &padded.pan,
                                &padded.ms,
                                method,
                                &grid,
                                &nodes[..workers],
                                &cfg.master,
                            )?,
                            None => fuse_tiled(&padded.pan, &padded.ms, method, &grid, workers)?,
                        };
                        times.push(start.elapsed().as_secs_f64());
                        drop(fused);
                    }
                    let wall = median(times);
                    report.rows.push(BenchRow {
                        method: method.label(),
                        pan_w: w,
                        pan_h: h,
                        grid: (gw, gh),
                        workers,
                        wall_seconds: wall,
                        megapixels_per_second: (w * h) as f64 / 1e6 / wall,
                    });
                }
            }
        }
    }
    Ok(report)
}

fn method_header(m: &str) -> String {
    m.to_uppercase()
}

impl BenchReport {
    fn methods(&self) -> Vec<&'static str> {
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.method) {
                seen.push(r.method);
            }
        }
        seen
    }

    fn configs(&self) -> BTreeSet<((usize, usize), usize)> {
        self.rows.iter().map(|r| (r.grid, r.workers)).collect()
    }

    fn sizes(&self) -> Vec<(usize, usize)> {
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&(r.pan_w, r.pan_h)) {
                seen.push((r.pan_w, r.pan_h));
            }
        }
        seen
    }

    pub fn find(&self, method: &str, size: (usize, usize), grid: (usize, usize), workers: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| {
            r.method == method && (r.pan_w, r.pan_h) == size && r.grid == grid && r.workers == workers
        })
    }

    /// `baseline_time / row_time` for the same size, grid and method.
    pub fn speedup(&self, row: &BenchRow, baseline_workers: usize) -> Option<f64> {
        self.find(row.method, (row.pan_w, row.pan_h), row.grid, baseline_workers)
            .map(|b| b.wall_seconds / row.wall_seconds)
    }

    /// One time table and one throughput table per grid and worker count:
    /// a row per PAN size, a column per method.
    pub fn render_tables(&self) -> String {
        let methods = self.methods();
        let mut out = String::new();
        for (grid, workers) in self.configs() {
            for (title, unit, pick) in [
                ("wall time", "s", (|r: &BenchRow| r.wall_seconds) as fn(&BenchRow) -> f64),
                ("throughput", "MP/s", |r: &BenchRow| r.megapixels_per_second),
            ] {
                let _ = writeln!(out, "# {title}, grid {}x{}, {workers} worker(s)", grid.0, grid.1);
                let _ = write!(out, "{:>14} {:>15}", "PAN width, px", "PAN height, px");
                for m in &methods {
                    let _ = write!(out, " {:>12}", format!("{}, {unit}", method_header(m)));
                }
                out.push('\n');
                for size in self.sizes() {
                    let _ = write!(out, "{:>14} {:>15}", size.0, size.1);
                    for m in &methods {
                        match self.find(m, size, grid, workers) {
                            Some(r) => write!(out, " {:>12.4}", pick(r)),
                            None => write!(out, " {:>12}", "-"),
                        }
                        .ok();
                    }
                    out.push('\n');
                }
                out.push('\n');
            }
        }
        out
    }

    /// Speedup of every non-baseline worker count over `baseline_workers`.
    pub fn render_speedup(&self, baseline_workers: usize) -> String {
        let methods = self.methods();
        let mut out = String::new();
        for (grid, workers) in self.configs() {
            if workers == baseline_workers {
                continue;
            }
            let _ = writeln!(
                out,
                "# speedup, grid {}x{}, {workers} vs {baseline_workers} worker(s)",
                grid.0, grid.1
            );
            let _ = write!(out, "{:>14} {:>15}", "PAN width, px", "PAN height, px");
            for m in &methods {
                let _ = write!(out, " {:>8}", method_header(m));
            }
            out.push('\n');
            for size in self.sizes() {
                let _ = write!(out, "{:>14} {:>15}", size.0, size.1);
                for m in &methods {
                    let s = self.find(m, size, grid, workers).and_then(|r| self.speedup(r, baseline_workers));
                    match s {
                        Some(s) => write!(out, " {:>8.2}", s),
                        None => write!(out, " {:>8}", "-"),
                    }
                    .ok();
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "method": r.method,
                    "pan_w": r.pan_w,
                    "pan_h": r.pan_h,
                    "grid": format!("{}x{}", r.grid.0, r.grid.1),
                    "workers": r.workers,
                    "wall_seconds": r.wall_seconds,
                    "megapixels_per_second": r.megapixels_per_second,
                })
            })
            .collect();
        json!({ "rows": rows })
    }
}

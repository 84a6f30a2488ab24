//! Fusion quality metrics.
//!
//! * ERGAS under the Wald protocol: the fused bands are block-mean degraded
//!   back to MS resolution and compared with the original MS bands.
//! * The universal quality index Q, averaged over 32x32 blocks.
//! * QNR = (1 - D_lambda)(1 - D_s), the no-reference index built from
//!   pairwise Q differences.
//!
//! All accumulation is in `f64` in a fixed order.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::fusion::resample_bilinear;
use crate::image::{MultibandImage, Plane};

pub const Q_BLOCK: usize = 32;

/// Double-precision raster used for intermediate metric inputs.
#[derive(Debug, Clone, PartialEq)]
struct Grid {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl From<&Plane> for Grid {
    fn from(p: &Plane) -> Self {
        Grid {
            width: p.width(),
            height: p.height(),
            data: p.samples().iter().map(|&v| f64::from(v)).collect(),
        }
    }
}

fn degrade_grid(src: &Grid, factor: usize) -> Result<Grid> {
    if factor == 0 || src.width % factor != 0 || src.height % factor != 0 {
        return Err(Error::NotDivisible {
            width: src.width,
            height: src.height,
            factor,
        });
    }
    let (w, h) = (src.width / factor, src.height / factor);
    let area = (factor * factor) as f64;
    let mut data = Vec::with_capacity(w * h);
    for by in 0..h {
        for bx in 0..w {
            let mut sum = 0.0;
            for y in by * factor..(by + 1) * factor {
                let row = &src.data[y * src.width..];
                for x in bx * factor..(bx + 1) * factor {
                    sum += row[x];
                }
            }
            data.push(sum / area);
        }
    }
    Ok(Grid {
        width: w,
        height: h,
        data,
    })
}

/// Block-mean downsampling by an integer factor.
pub fn degrade(plane: &Plane, factor: usize) -> Result<Plane> {
    let g = degrade_grid(&Grid::from(plane), factor)?;
    Ok(Plane::from_raw(
        g.width,
        g.height,
        g.data.iter().map(|&v| v as f32).collect(),
    ))
}

/// Block boundaries along one axis: multiples of `Q_BLOCK`, with the
/// remainder folded into the last block. Extents under `Q_BLOCK` give a
/// single block.
fn block_edges(len: usize) -> Vec<(usize, usize)> {
    let count = (len / Q_BLOCK).max(1);
    (0..count)
        .map(|i| {
            let start = i * Q_BLOCK;
            let end = if i + 1 == count { len } else { start + Q_BLOCK };
            (start, end)
        })
        .collect()
}

fn q_block(a: &Grid, b: &Grid, xs: (usize, usize), ys: (usize, usize)) -> f64 {
    let n = ((xs.1 - xs.0) * (ys.1 - ys.0)) as f64;
    let samples = || {
        (ys.0..ys.1).flat_map(move |y| {
            (xs.0..xs.1).map(move |x| (a.data[y * a.width + x], b.data[y * b.width + x]))
        })
    };
    let (mut sa, mut sb) = (0.0, 0.0);
    for (va, vb) in samples() {
        sa += va;
        sb += vb;
    }
    let (ma, mb) = (sa / n, sb / n);
    let (mut vaa, mut vbb, mut vab) = (0.0, 0.0, 0.0);
    for (va, vb) in samples() {
        let (da, db) = (va - ma, vb - mb);
        vaa += da * da;
        vbb += db * db;
        vab += da * db;
    }
    let (vaa, vbb, vab) = (vaa / n, vbb / n, vab / n);
    let denom = (vaa + vbb) * (ma * ma + mb * mb);
    if denom == 0.0 {
        if samples().all(|(va, vb)| va == vb) {
            1.0
        } else {
            0.0
        }
    } else {
        4.0 * vab * ma * mb / denom
    }
}

fn q_grid(a: &Grid, b: &Grid) -> Result<f64> {
    if (a.width, a.height) != (b.width, b.height) {
        return Err(Error::DimensionMismatch("Q-index operands differ in size"));
    }
    let xs = block_edges(a.width);
    let ys = block_edges(a.height);
    let mut sum = 0.0;
    for &y in &ys {
        for &x in &xs {
            sum += q_block(a, b, x, y);
        }
    }
    Ok(sum / (xs.len() * ys.len()) as f64)
}

/// Universal image quality index, averaged over non-overlapping blocks.
pub fn q_index(a: &Plane, b: &Plane) -> Result<f64> {
    q_grid(&Grid::from(a), &Grid::from(b))
}

fn ergas_grids(fused: &[Grid], reference: &[Grid], ratio: usize) -> Result<f64> {
    let mut acc = 0.0;
    for (k, (f, r)) in fused.iter().zip(reference).enumerate() {
        let n = r.data.len() as f64;
        let mean = r.data.iter().sum::<f64>() / n;
        if mean == 0.0 {
            return Err(Error::ZeroBandMean(k));
        }
        let mse = f
            .data
            .iter()
            .zip(&r.data)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / n;
        acc += mse / (mean * mean);
    }
    Ok(100.0 / ratio as f64 * libm::sqrt(acc / fused.len() as f64))
}

/// ERGAS of `fused` against `ms_ref`, with `fused` block-mean degraded by
/// `ratio` before comparison.
pub fn ergas(fused: &MultibandImage, ms_ref: &MultibandImage, ratio: usize) -> Result<f64> {
    if fused.band_count() != ms_ref.band_count() {
        return Err(Error::DimensionMismatch("band counts differ"));
    }
    if ratio == 0 || fused.dims() != (ms_ref.width() * ratio, ms_ref.height() * ratio) {
        return Err(Error::DimensionMismatch("fused size is not MS size times the ratio"));
    }
    let degraded = fused
        .bands()
        .iter()
        .map(|b| degrade_grid(&Grid::from(b), ratio))
        .collect::<Result<Vec<_>>>()?;
    let reference: Vec<Grid> = ms_ref.bands().iter().map(Grid::from).collect();
    ergas_grids(&degraded, &reference, ratio)
}

/// ERGAS of `fused` against a reference of the same size. `ratio` is only
/// the PAN/MS resolution ratio in the normalization term.
pub fn ergas_full_reference(
    fused: &MultibandImage,
    reference: &MultibandImage,
    ratio: usize,
) -> Result<f64> {
    if fused.band_count() != reference.band_count() || fused.dims() != reference.dims() {
        return Err(Error::DimensionMismatch("fused and reference differ in shape"));
    }
    if ratio == 0 {
        return Err(Error::DimensionMismatch("ratio must be positive"));
    }
    let f: Vec<Grid> = fused.bands().iter().map(Grid::from).collect();
    let r: Vec<Grid> = reference.bands().iter().map(Grid::from).collect();
    ergas_grids(&f, &r, ratio)
}

fn upsample_ms(ms: &MultibandImage, width: usize, height: usize) -> Result<Vec<Grid>> {
    if ms.width() > width || ms.height() > height {
        return Err(Error::DimensionMismatch("MS larger than fused"));
    }
    Ok(ms
        .bands()
        .iter()
        .map(|b| Grid::from(&resample_bilinear(b, width, height)))
        .collect())
}

fn d_lambda_grids(fused: &[Grid], ms_up: &[Grid]) -> Result<f64> {
    let n = fused.len();
    let mut sum = 0.0;
    for k in 0..n {
        for l in 0..n {
            if k != l {
                let qf = q_grid(&fused[k], &fused[l])?;
                let qm = q_grid(&ms_up[k], &ms_up[l])?;
                sum += (qf - qm).abs();
            }
        }
    }
    Ok((sum / (n * (n - 1)) as f64).clamp(0.0, 1.0))
}

/// Spectral distortion: mean absolute change of inter-band Q between the
/// upsampled MS bands and the fused bands.
pub fn d_lambda(fused: &MultibandImage, ms: &MultibandImage) -> Result<f64> {
    if fused.band_count() != ms.band_count() {
        return Err(Error::DimensionMismatch("band counts differ"));
    }
    if fused.band_count() < 2 {
        return Err(Error::TooFewBands(fused.band_count()));
    }
    let ms_up = upsample_ms(ms, fused.width(), fused.height())?;
    let f: Vec<Grid> = fused.bands().iter().map(Grid::from).collect();
    d_lambda_grids(&f, &ms_up)
}

fn infer_ratio(high: (usize, usize), low: (usize, usize)) -> Result<usize> {
    let ratio = high.0 / low.0;
    if ratio == 0 || high != (low.0 * ratio, low.1 * ratio) {
        return Err(Error::DimensionMismatch("sizes are not related by an integer ratio"));
    }
    Ok(ratio)
}

fn d_s_grids(fused: &[Grid], ms: &[Grid], pan: &Grid, ratio: usize) -> Result<f64> {
    let pan_low = degrade_grid(pan, ratio)?;
    let mut sum = 0.0;
    for (f, m) in fused.iter().zip(ms) {
        sum += (q_grid(f, pan)? - q_grid(m, &pan_low)?).abs();
    }
    Ok((sum / fused.len() as f64).clamp(0.0, 1.0))
}

/// Spatial distortion: mean absolute change of band-to-PAN Q between the
/// MS scale (against the degraded PAN) and the PAN scale.
pub fn d_s(fused: &MultibandImage, ms: &MultibandImage, pan: &Plane) -> Result<f64> {
    if fused.dims() != pan.dims() {
        return Err(Error::DimensionMismatch("fused and PAN differ in size"));
    }
    if fused.band_count() != ms.band_count() {
        return Err(Error::DimensionMismatch("band counts differ"));
    }
    let ratio = infer_ratio(pan.dims(), ms.dims())?;
    let f: Vec<Grid> = fused.bands().iter().map(Grid::from).collect();
    let m: Vec<Grid> = ms.bands().iter().map(Grid::from).collect();
    d_s_grids(&f, &m, &Grid::from(pan), ratio)
}

/// Combined quality figures for one fusion result.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub ergas: f64,
    pub q_per_band: Vec<f64>,
    pub d_lambda: f64,
    pub d_s: f64,
    pub qnr: f64,
}

impl QualityReport {
    pub fn from_distortions(ergas: f64, q_per_band: Vec<f64>, d_lambda: f64, d_s: f64) -> Self {
        QualityReport {
            ergas,
            q_per_band,
            d_lambda,
            d_s,
            qnr: (1.0 - d_lambda) * (1.0 - d_s),
        }
    }
}

/// `key=value` lines, six decimals.
impl fmt::Display for QualityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ergas={:.6}", self.ergas)?;
        for (k, q) in self.q_per_band.iter().enumerate() {
            writeln!(f, "q_band_{k}={q:.6}")?;
        }
        writeln!(f, "d_lambda={:.6}", self.d_lambda)?;
        writeln!(f, "d_s={:.6}", self.d_s)?;
        writeln!(f, "qnr={:.6}", self.qnr)
    }
}

/// Full report. The resolution ratio is inferred from the PAN/MS sizes.
pub fn qnr(fused: &MultibandImage, ms: &MultibandImage, pan: &Plane) -> Result<QualityReport> {
    if fused.dims() != pan.dims() {
        return Err(Error::DimensionMismatch("fused and PAN differ in size"));
    }
    if fused.band_count() != ms.band_count() {
        return Err(Error::DimensionMismatch("band counts differ"));
    }
    if fused.band_count() < 2 {
        return Err(Error::TooFewBands(fused.band_count()));
    }
    let ratio = infer_ratio(pan.dims(), ms.dims())?;
    let f: Vec<Grid> = fused.bands().iter().map(Grid::from).collect();
    let m: Vec<Grid> = ms.bands().iter().map(Grid::from).collect();
    let ms_up = upsample_ms(ms, pan.width(), pan.height())?;

    let degraded = f
        .iter()
        .map(|b| degrade_grid(b, ratio))
        .collect::<Result<Vec<_>>>()?;
    let ergas = ergas_grids(&degraded, &m, ratio)?;
    let q_per_band = f
        .iter()
        .zip(&ms_up)
        .map(|(a, b)| q_grid(a, b))
        .collect::<Result<Vec<_>>>()?;
    let dl = d_lambda_grids(&f, &ms_up)?;
    let ds = d_s_grids(&f, &m, &Grid::from(pan), ratio)?;
    Ok(QualityReport::from_distortions(ergas, q_per_band, dl, ds))
}

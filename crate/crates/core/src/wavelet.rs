//! Single-level Haar and Daubechies-4 wavelet transforms.
//!
//! A transformed vector of length `n` keeps the approximation coefficients
//! in `[0, n/2)` and the detail coefficients in `[n/2, n)`. The 2D transform
//! runs the 1D transform over every row and then over every column, so the
//! approximation (LL) quadrant ends up in the top-left `w/2 x h/2` block.
//!
//! Haar uses the averaging pair `(a + b) / 2`, `(a - b) / 2` whose inverse is
//! `a + d`, `a - d`. Daubechies-4 uses the orthonormal four-tap bank with a
//! periodic boundary: the last coefficient pair of a row wraps around to the
//! first two samples.
//!
//! All routines are generic over the storage type [`Sample`] (`f32` for the
//! compute representation, `f64` for reference runs). Arithmetic is done in
//! `f64`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};
use crate::image::Plane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveletKind {
    Haar,
    Daubechies4,
}

impl WaveletKind {
    /// Shortest signal (and smallest plane side) the transform accepts.
    pub fn min_len(self) -> usize {
        match self {
            WaveletKind::Haar => 2,
            WaveletKind::Daubechies4 => 4,
        }
    }

    /// Gain of the LL coefficient for a constant plane: Haar averages, the
    /// Daubechies low-pass sums to `sqrt(2)` per pass.
    pub fn dc_gain(self) -> f32 {
        match self {
            WaveletKind::Haar => 1.0,
            WaveletKind::Daubechies4 => 2.0,
        }
    }
}

/// Floating-point sample type the transforms are generic over.
pub trait Sample:
    Copy + Debug + Default + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Sample for f32 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline]
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Sample for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
}

/// Daubechies-4 analysis (`h`, `g`) and synthesis (`t`, `u`) coefficients.
///
/// `t = (h2, g2, h0, g0)` and `u = (h3, g3, h1, g1)`: the even and odd output
/// sample of the inverse are dot products of these with
/// `(a[i-1], d[i-1], a[i], d[i])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterBank<T> {
    pub h: [T; 4],
    pub g: [T; 4],
    pub t: [T; 4],
    pub u: [T; 4],
}

impl FilterBank<f64> {
    pub fn narrow<T: Sample>(&self) -> FilterBank<T> {
        let n = |a: [f64; 4]| a.map(T::from_f64);
        FilterBank {
            h: n(self.h),
            g: n(self.g),
            t: n(self.t),
            u: n(self.u),
        }
    }
}

/// The Daubechies-4 filter bank in double precision.
///
/// `h[i] = (1 + 2i + sqrt 3) / (4 sqrt 2)` and
/// `h[i+2] = (3 - 2i - sqrt 3) / (4 sqrt 2)` for `i` in {0, 1}. The high-pass
/// filter is the quadrature mirror `g[k] = (-1)^k h[3-k]`.
pub fn d4_filters() -> FilterBank<f64> {
    let sqrt3 = libm::sqrt(3.0);
    let norm = 4.0 * libm::sqrt(2.0);
    let mut h = [0.0; 4];
    for i in 0..2 {
        let i_f = i as f64;
        h[i] = (1.0 + 2.0 * i_f + sqrt3) / norm;
        h[i + 2] = (3.0 - 2.0 * i_f - sqrt3) / norm;
    }
    let g = [h[3], -h[2], h[1], -h[0]];
    FilterBank {
        h,
        g,
        t: [h[2], g[2], h[0], g[0]],
        u: [h[3], g[3], h[1], g[1]],
    }
}

fn check_len(len: usize, kind: WaveletKind) -> Result<()> {
    if len % 2 != 0 {
        return Err(Error::OddLength(len));
    }
    if len < kind.min_len() {
        return Err(Error::TooShort {
            len,
            min: kind.min_len(),
        });
    }
    Ok(())
}

fn check_dims(width: usize, height: usize, kind: WaveletKind) -> Result<()> {
    if width % 2 != 0 || height % 2 != 0 {
        return Err(Error::OddDimension { width, height });
    }
    let min = kind.min_len();
    if width < min || height < min {
        return Err(Error::TooSmall { width, height, min });
    }
    Ok(())
}

#[inline]
fn dot4(x: [f64; 4], c: &[f64; 4]) -> f64 {
    x[0] * c[0] + x[1] * c[1] + x[2] * c[2] + x[3] * c[3]
}

// Arithmetic runs in f64 whatever the storage type; `S` and `D` only set
// where rounding to storage precision happens.

fn forward_into<S: Sample, D: Sample>(src: &[S], dst: &mut [D], kind: WaveletKind, bank: &FilterBank<f64>) {
    let n = src.len();
    let half = n / 2;
    let s = |i: usize| src[i].to_f64();
    match kind {
        WaveletKind::Haar => {
            for i in 0..half {
                let (a, b) = (s(2 * i), s(2 * i + 1));
                dst[i] = D::from_f64((a + b) * 0.5);
                dst[half + i] = D::from_f64((a - b) * 0.5);
            }
        }
        WaveletKind::Daubechies4 => {
            for i in 0..half {
                let j = 2 * i;
                let x = if i + 1 < half {
                    [s(j), s(j + 1), s(j + 2), s(j + 3)]
                } else {
                    [s(n - 2), s(n - 1), s(0), s(1)]
                };
                dst[i] = D::from_f64(dot4(x, &bank.h));
                dst[half + i] = D::from_f64(dot4(x, &bank.g));
            }
        }
    }
}

fn inverse_into<S: Sample, D: Sample>(src: &[S], dst: &mut [D], kind: WaveletKind, bank: &FilterBank<f64>) {
    let half = src.len() / 2;
    let a = |i: usize| src[i].to_f64();
    let d = |i: usize| src[half + i].to_f64();
    match kind {
        WaveletKind::Haar => {
            for i in 0..half {
                dst[2 * i] = D::from_f64(a(i) + d(i));
                dst[2 * i + 1] = D::from_f64(a(i) - d(i));
            }
        }
        WaveletKind::Daubechies4 => {
            for i in 0..half {
                let prev = if i == 0 { half - 1 } else { i - 1 };
                let x = [a(prev), d(prev), a(i), d(i)];
                dst[2 * i] = D::from_f64(dot4(x, &bank.t));
                dst[2 * i + 1] = D::from_f64(dot4(x, &bank.u));
            }
        }
    }
}

/// Forward 1D transform of an even-length signal.
pub fn dwt1d_forward<T: Sample>(signal: &[T], kind: WaveletKind) -> Result<Vec<T>> {
    check_len(signal.len(), kind)?;
    let mut out = vec![T::default(); signal.len()];
    forward_into(signal, &mut out, kind, &d4_filters());
    Ok(out)
}

/// Inverse of [`dwt1d_forward`].
pub fn dwt1d_inverse<T: Sample>(coeffs: &[T], kind: WaveletKind) -> Result<Vec<T>> {
    check_len(coeffs.len(), kind)?;
    let mut out = vec![T::default(); coeffs.len()];
    inverse_into(coeffs, &mut out, kind, &d4_filters());
    Ok(out)
}

// Column passes run over whole rows at a time. Every output sample is
// produced by the same expression the 1D routines use, so results are
// bit-identical to gathering each column and transforming it.

fn columns_forward<S: Sample, D: Sample>(
    src: &[S],
    dst: &mut [D],
    width: usize,
    height: usize,
    kind: WaveletKind,
    bank: &FilterBank<f64>,
) {
    let half = height / 2;
    let row = |y: usize| &src[y * width..(y + 1) * width];
    let (approx, detail) = dst.split_at_mut(half * width);
    for i in 0..half {
        let a_out = &mut approx[i * width..(i + 1) * width];
        let d_out = &mut detail[i * width..(i + 1) * width];
        match kind {
            WaveletKind::Haar => {
                let (r0, r1) = (row(2 * i), row(2 * i + 1));
                for x in 0..width {
                    let (a, b) = (r0[x].to_f64(), r1[x].to_f64());
                    a_out[x] = D::from_f64((a + b) * 0.5);
                    d_out[x] = D::from_f64((a - b) * 0.5);
                }
            }
            WaveletKind::Daubechies4 => {
                let rows = if i + 1 < half {
                    [row(2 * i), row(2 * i + 1), row(2 * i + 2), row(2 * i + 3)]
                } else {
                    [row(height - 2), row(height - 1), row(0), row(1)]
                };
                for x in 0..width {
                    let v = rows.map(|r| r[x].to_f64());
                    a_out[x] = D::from_f64(dot4(v, &bank.h));
                    d_out[x] = D::from_f64(dot4(v, &bank.g));
                }
            }
        }
    }
}

fn columns_inverse<S: Sample, D: Sample>(
    src: &[S],
    dst: &mut [D],
    width: usize,
    height: usize,
    kind: WaveletKind,
    bank: &FilterBank<f64>,
) {
    let half = height / 2;
    let approx = |i: usize| &src[i * width..(i + 1) * width];
    let detail = |i: usize| &src[(half + i) * width..(half + i + 1) * width];
    for i in 0..half {
        let (even, odd) = dst[2 * i * width..(2 * i + 2) * width].split_at_mut(width);
        match kind {
            WaveletKind::Haar => {
                let (a, d) = (approx(i), detail(i));
                for x in 0..width {
                    let (a, d) = (a[x].to_f64(), d[x].to_f64());
                    even[x] = D::from_f64(a + d);
                    odd[x] = D::from_f64(a - d);
                }
            }
            WaveletKind::Daubechies4 => {
                let prev = if i == 0 { half - 1 } else { i - 1 };
                let (ap, dp, ac, dc) = (approx(prev), detail(prev), approx(i), detail(i));
                for x in 0..width {
                    let v = [ap[x].to_f64(), dp[x].to_f64(), ac[x].to_f64(), dc[x].to_f64()];
                    even[x] = D::from_f64(dot4(v, &bank.t));
                    odd[x] = D::from_f64(dot4(v, &bank.u));
                }
            }
        }
    }
}

/// Forward 2D transform of a row-major `width x height` buffer: rows first,
/// then columns. The intermediate row pass is held in `f64`; rounding to
/// `T` happens once, on output.
pub fn dwt2d_forward_slice<T: Sample>(
    src: &[T],
    width: usize,
    height: usize,
    kind: WaveletKind,
) -> Result<Vec<T>> {
    check_dims(width, height, kind)?;
    if src.len() != width * height {
        return Err(Error::DimensionMismatch("buffer length does not match dimensions"));
    }
    let bank = d4_filters();
    let mut rows = vec![0.0f64; src.len()];
    for (s, d) in src.chunks_exact(width).zip(rows.chunks_exact_mut(width)) {
        forward_into(s, d, kind, &bank);
    }
    let mut out = vec![T::default(); src.len()];
    columns_forward(&rows, &mut out, width, height, kind, &bank);
    Ok(out)
}

/// Inverse 2D transform: columns first, then rows.
pub fn dwt2d_inverse_slice<T: Sample>(
    src: &[T],
    width: usize,
    height: usize,
    kind: WaveletKind,
) -> Result<Vec<T>> {
    check_dims(width, height, kind)?;
    if src.len() != width * height {
        return Err(Error::DimensionMismatch("buffer length does not match dimensions"));
    }
    let bank = d4_filters();
    let mut cols = vec![0.0f64; src.len()];
    columns_inverse(src, &mut cols, width, height, kind, &bank);
    let mut out = vec![T::default(); src.len()];
    for (s, d) in cols.chunks_exact(width).zip(out.chunks_exact_mut(width)) {
        inverse_into(s, d, kind, &bank);
    }
    Ok(out)
}

pub fn dwt2d_forward(plane: &Plane, kind: WaveletKind) -> Result<Plane> {
    let (w, h) = plane.dims();
    let out = dwt2d_forward_slice(plane.samples(), w, h, kind)?;
    Ok(Plane::from_raw(w, h, out))
}

pub fn dwt2d_inverse(plane: &Plane, kind: WaveletKind) -> Result<Plane> {
    let (w, h) = plane.dims();
    let out = dwt2d_inverse_slice(plane.samples(), w, h, kind)?;
    Ok(Plane::from_raw(w, h, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_forward_example() {
        assert_eq!(
            dwt1d_forward(&[6.0f32, 2.0, 4.0, 8.0], WaveletKind::Haar).unwrap(),
            [4.0, 6.0, 2.0, -2.0]
        );
        assert_eq!(
            dwt1d_forward(&[5.0f32; 4], WaveletKind::Haar).unwrap(),
            [5.0, 5.0, 0.0, 0.0]
        );
    }

    #[test]
    fn haar_inverse_example() {
        assert_eq!(
            dwt1d_inverse(&[4.0f32, 6.0, 2.0, -2.0], WaveletKind::Haar).unwrap(),
            [6.0, 2.0, 4.0, 8.0]
        );
    }

    #[test]
    fn d4_on_ones() {
        let out = dwt1d_forward(&[1.0f64; 8], WaveletKind::Daubechies4).unwrap();
        let r2 = core::f64::consts::SQRT_2;
        for (i, v) in out.iter().enumerate() {
            let want = if i < 4 { r2 } else { 0.0 };
            assert!((v - want).abs() < 1e-6, "{i}: {v}");
        }
    }

    #[test]
    fn d4_filter_values() {
        let b = d4_filters();
        let h = [0.4829629131, 0.8365163037, 0.2241438680, -0.1294095226];
        let g = [-0.1294095226, -0.2241438680, 0.8365163037, -0.4829629131];
        for k in 0..4 {
            assert!((b.h[k] - h[k]).abs() < 1e-10);
            assert!((b.g[k] - g[k]).abs() < 1e-10);
        }
        assert!((b.h.iter().sum::<f64>() - core::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(b.g.iter().sum::<f64>().abs() < 1e-12);
        assert_eq!(b.t, [b.h[2], b.g[2], b.h[0], b.g[0]]);
        assert_eq!(b.u, [b.h[3], b.g[3], b.h[1], b.g[1]]);
    }

    #[test]
    fn d4_roundtrip_ramp() {
        let x: Vec<f32> = (1..=8).map(|v| v as f32).collect();
        let c = dwt1d_forward(&x, WaveletKind::Daubechies4).unwrap();
        let y = dwt1d_inverse(&c, WaveletKind::Daubechies4).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() <= 1e-4);
        }
    }

    #[test]
    fn length_errors() {
        assert_eq!(
            dwt1d_forward(&[1.0f32; 3], WaveletKind::Haar),
            Err(Error::OddLength(3))
        );
        assert_eq!(
            dwt1d_forward(&[1.0f32; 2], WaveletKind::Daubechies4),
            Err(Error::TooShort { len: 2, min: 4 })
        );
        assert_eq!(
            dwt1d_inverse(&[1.0f32; 5], WaveletKind::Daubechies4),
            Err(Error::OddLength(5))
        );
        assert!(dwt1d_forward::<f32>(&[], WaveletKind::Haar).is_err());
    }

    #[test]
    fn haar_2d_examples() {
        let p = Plane::new(2, 2, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        let f = dwt2d_forward(&p, WaveletKind::Haar).unwrap();
        assert_eq!(f.samples(), &[4.0, -1.0, -2.0, 0.0]);
        let back = dwt2d_inverse(&f, WaveletKind::Haar).unwrap();
        assert_eq!(back, p);

        let c = Plane::filled(4, 4, 100.0);
        let f = dwt2d_forward(&c, WaveletKind::Haar).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                let want = if x < 2 && y < 2 { 100.0 } else { 0.0 };
                assert_eq!(f.get(x, y), want);
            }
        }
    }

    #[test]
    fn inverse_of_zeros() {
        for kind in [WaveletKind::Haar, WaveletKind::Daubechies4] {
            let z = Plane::filled(8, 4, 0.0);
            assert_eq!(dwt2d_inverse(&z, kind).unwrap(), z);
        }
    }

    #[test]
    fn dimension_errors() {
        let p = Plane::filled(3, 4, 1.0);
        assert_eq!(
            dwt2d_forward(&p, WaveletKind::Haar),
            Err(Error::OddDimension {
                width: 3,
                height: 4
            })
        );
        let p = Plane::filled(2, 8, 1.0);
        assert!(matches!(
            dwt2d_forward(&p, WaveletKind::Daubechies4),
            Err(Error::TooSmall { .. })
        ));
        assert!(dwt2d_inverse(&p, WaveletKind::Daubechies4).is_err());
    }
}

//! Independent checks of the wavelet transforms: a dense analysis matrix
//! built straight from the filter formulas, inverted by Gauss-Jordan
//! elimination, and property tests for reconstruction and linearity.

use proptest::prelude::*;
use wavefuse_core::image::Plane;
use wavefuse_core::wavelet::{
    dwt1d_forward, dwt1d_inverse, dwt2d_forward, dwt2d_forward_slice, dwt2d_inverse,
    dwt2d_inverse_slice, WaveletKind,
};

fn d4_taps() -> ([f64; 4], [f64; 4]) {
    let s3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    let h = [(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d];
    let g = [h[3], -h[2], h[1], -h[0]];
    (h, g)
}

/// Row `i < n/2` holds `h` at columns `2i..2i+3 (mod n)`, row `n/2 + i`
/// holds `g` at the same columns.
fn analysis_matrix(n: usize) -> Vec<Vec<f64>> {
    let (h, g) = d4_taps();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n / 2 {
        for k in 0..4 {
            a[i][(2 * i + k) % n] += h[k];
            a[n / 2 + i][(2 * i + k) % n] += g[k];
        }
    }
    a
}

fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col];
        assert!(p.abs() > 1e-12, "singular analysis matrix");
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col];
                for j in 0..n {
                    a[r][j] -= f * a[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    inv
}

fn apply(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn d4_matches_dense_matrix_oracle() {
    for n in [4usize, 8, 16] {
        let a = analysis_matrix(n);
        let a_inv = invert(a.clone());
        let x: Vec<f64> = (0..n).map(|i| ((i * 37 + 11) % 256) as f64).collect();
        let fwd = dwt1d_forward(&x, WaveletKind::Daubechies4).unwrap();
        assert!(max_abs_diff(&fwd, &apply(&a, &x)) < 1e-9, "forward n={n}");
        let c: Vec<f64> = (0..n).map(|i| (i as f64 * 1.7).sin() * 50.0).collect();
        let inv = dwt1d_inverse(&c, WaveletKind::Daubechies4).unwrap();
        assert!(max_abs_diff(&inv, &apply(&a_inv, &c)) < 1e-9, "inverse n={n}");
    }
}

#[test]
fn symmetric_high_pass_breaks_reconstruction() {
    // A symmetric four-tap high-pass (equal outer taps, equal inner taps)
    // does not pair with h: the matrix it builds is not orthogonal.
    let s3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    let g_bad = [(s3 - 3.0) / d, (2.0 + s3 - 3.0) / d, (s3 - 1.0) / d, (s3 - 3.0) / d];
    let (h, _) = d4_taps();
    let n = 8;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n / 2 {
        for k in 0..4 {
            a[i][(2 * i + k) % n] += h[k];
            a[n / 2 + i][(2 * i + k) % n] += g_bad[k];
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let dot: f64 = (0..n).map(|k| a[i][k] * a[j][k]).sum();
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - want).abs());
        }
    }
    assert!(worst > 0.1, "filter unexpectedly orthogonal: {worst}");
}

#[test]
fn haar_matches_averaging_definition() {
    let x = [9.0f64, 1.0, -4.0, 6.0, 0.5, 0.25];
    let c = dwt1d_forward(&x, WaveletKind::Haar).unwrap();
    for i in 0..3 {
        assert_eq!(c[i], (x[2 * i] + x[2 * i + 1]) / 2.0);
        assert_eq!(c[3 + i], (x[2 * i] - x[2 * i + 1]) / 2.0);
    }
}

fn transpose(s: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut t = vec![0.0; s.len()];
    for y in 0..h {
        for x in 0..w {
            t[x * h + y] = s[y * w + x];
        }
    }
    t
}

/// Columns first, then rows, built from the 1D transform alone. Run in
/// `f64` so the intermediate precision matches the 2D routine.
fn columns_first(s: &[f64], w: usize, h: usize, kind: WaveletKind) -> Vec<f64> {
    let mut tmp = vec![0.0; s.len()];
    for x in 0..w {
        let col: Vec<f64> = (0..h).map(|y| s[y * w + x]).collect();
        for (y, v) in dwt1d_forward(&col, kind).unwrap().into_iter().enumerate() {
            tmp[y * w + x] = v;
        }
    }
    tmp.chunks(w)
        .flat_map(|r| dwt1d_forward(r, kind).unwrap())
        .collect()
}

#[test]
fn transpose_symmetry() {
    let (w, h) = (8, 6);
    let s: Vec<f64> = (0..w * h).map(|i| ((i * 53) % 251) as f64).collect();
    for kind in [WaveletKind::Haar, WaveletKind::Daubechies4] {
        let t = transpose(&s, w, h);
        let lhs = dwt2d_forward_slice(&t, h, w, kind).unwrap();
        let rhs = transpose(&columns_first(&s, w, h, kind), w, h);
        assert_eq!(lhs, rhs, "{kind:?}");
    }
}

#[test]
fn two_d_matches_row_then_column_1d() {
    let (w, h) = (6, 8);
    let s: Vec<f64> = (0..w * h).map(|i| ((i * 29 + 3) % 256) as f64).collect();
    for kind in [WaveletKind::Haar, WaveletKind::Daubechies4] {
        let rows: Vec<f64> = s
            .chunks(w)
            .flat_map(|r| dwt1d_forward(r, kind).unwrap())
            .collect();
        let mut want = vec![0.0; s.len()];
        for x in 0..w {
            let col: Vec<f64> = (0..h).map(|y| rows[y * w + x]).collect();
            for (y, v) in dwt1d_forward(&col, kind).unwrap().into_iter().enumerate() {
                want[y * w + x] = v;
            }
        }
        assert_eq!(dwt2d_forward_slice(&s, w, h, kind).unwrap(), want, "{kind:?}");
    }
}

fn kinds() -> impl Strategy<Value = WaveletKind> {
    prop_oneof![Just(WaveletKind::Haar), Just(WaveletKind::Daubechies4)]
}

fn plane_strategy() -> impl Strategy<Value = (usize, usize, Vec<f32>)> {
    (2usize..=32, 2usize..=32).prop_flat_map(|(hw, hh)| {
        let (w, h) = (hw * 2, hh * 2);
        (Just(w), Just(h), prop::collection::vec(0.0f32..=255.0, w * h))
    })
}

proptest! {
    #[test]
    fn perfect_reconstruction_f32((w, h, s) in plane_strategy(), kind in kinds()) {
        let p = Plane::new(w, h, s).unwrap();
        let back = dwt2d_inverse(&dwt2d_forward(&p, kind).unwrap(), kind).unwrap();
        let err = p.samples().iter().zip(back.samples()).map(|(a, b)| (a - b).abs()).fold(0.0, f32::max);
        prop_assert!(err <= 1e-4, "max error {}", err);
    }

    #[test]
    fn perfect_reconstruction_f64((w, h, s) in plane_strategy(), kind in kinds()) {
        let s: Vec<f64> = s.into_iter().map(f64::from).collect();
        let c = dwt2d_forward_slice(&s, w, h, kind).unwrap();
        let back = dwt2d_inverse_slice(&c, w, h, kind).unwrap();
        prop_assert!(max_abs_diff(&s, &back) <= 1e-9);
    }

    #[test]
    fn constant_vector(c in -300.0f64..300.0, half in 2usize..20, kind in kinds()) {
        let x = vec![c; half * 2];
        let out = dwt1d_forward(&x, kind).unwrap();
        let gain = match kind { WaveletKind::Haar => 1.0, WaveletKind::Daubechies4 => 2f64.sqrt() };
        for (i, v) in out.iter().enumerate() {
            let want = if i < half { c * gain } else { 0.0 };
            prop_assert!((v - want).abs() < 1e-6);
        }
    }

    #[test]
    fn linearity(
        x in prop::collection::vec(0.0f64..255.0, 16),
        y in prop::collection::vec(0.0f64..255.0, 16),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        kind in kinds(),
    ) {
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let fx = dwt1d_forward(&x, kind).unwrap();
        let fy = dwt1d_forward(&y, kind).unwrap();
        let fm = dwt1d_forward(&mix, kind).unwrap();
        for i in 0..16 {
            prop_assert!((fm[i] - (a * fx[i] + b * fy[i])).abs() < 1e-9);
        }
    }

    #[test]
    fn one_d_round_trip(x in prop::collection::vec(0.0f64..255.0, 2..40), kind in kinds()) {
        prop_assume!(x.len() % 2 == 0 && x.len() >= kind.min_len());
        let back = dwt1d_inverse(&dwt1d_forward(&x, kind).unwrap(), kind).unwrap();
        prop_assert!(max_abs_diff(&x, &back) <= 1e-9);
    }
}

//! Pan-sharpening methods.
//!
//! Every method takes one PAN plane and N MS bands and returns N bands at
//! PAN resolution:
//!
//! * weighted averaging: `w * pan + (1 - w) * ms_up`
//! * additive IHS: `ms_up + (pan - mean(ms_up))` over exactly three bands
//! * wavelet coefficient replacement: forward 2D DWT of the PAN plane,
//!   overwrite the LL quadrant with the MS band, inverse 2D DWT
//!
//! MS bands are brought to the working resolution of the method with
//! bilinear resampling: PAN size for averaging and IHS, half the PAN size
//! for the wavelet methods (the LL quadrant of a single-level transform).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::{MultibandImage, Plane};
use crate::wavelet::{dwt2d_forward, dwt2d_inverse, WaveletKind};

pub const DEFAULT_WA_WEIGHT: f32 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FusionMethod {
    WeightedAverage { weight: f32 },
    Ihs,
    DwtReplace(WaveletKind),
}

impl FusionMethod {
    pub fn validate(&self, bands: usize) -> Result<()> {
        match *self {
            FusionMethod::WeightedAverage { weight } => check_weight(weight),
            FusionMethod::Ihs if bands != 3 => Err(Error::BandCountMismatch {
                expected: 3,
                found: bands,
            }),
            _ => Ok(()),
        }
    }

    /// Size the MS bands must have before the per-pixel fusion step.
    pub fn working_size(&self, pan_w: usize, pan_h: usize) -> (usize, usize) {
        match self {
            FusionMethod::DwtReplace(_) => (pan_w / 2, pan_h / 2),
            _ => (pan_w, pan_h),
        }
    }

    /// Short lowercase name as used on the command line.
    pub fn label(&self) -> &'static str {
        match self {
            FusionMethod::WeightedAverage { .. } => "wa",
            FusionMethod::Ihs => "ihs",
            FusionMethod::DwtReplace(WaveletKind::Haar) => "hdwt",
            FusionMethod::DwtReplace(WaveletKind::Daubechies4) => "ddwt",
        }
    }
}

fn check_weight(weight: f32) -> Result<()> {
    if (0.0..=1.0).contains(&weight) {
        Ok(())
    } else {
        Err(Error::WeightOutOfRange(weight))
    }
}

/// Bilinear resampling with pixel-center alignment. The source coordinate
/// of output pixel `d` is `(d + 0.5) * in / out - 0.5`, clamped to the
/// source extent.
pub fn resample_bilinear(plane: &Plane, out_w: usize, out_h: usize) -> Plane {
    assert!(out_w > 0 && out_h > 0, "resample target must be non-empty");
    let (in_w, in_h) = plane.dims();
    if (in_w, in_h) == (out_w, out_h) {
        return plane.clone();
    }
    let taps = |n_in: usize, n_out: usize| -> Vec<(usize, usize, f32)> {
        let scale = n_in as f64 / n_out as f64;
        (0..n_out)
            .map(|d| {
                let s = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, (n_in - 1) as f64);
                let i0 = s as usize;
                let i1 = (i0 + 1).min(n_in - 1);
                (i0, i1, (s - i0 as f64) as f32)
            })
            .collect()
    };
    let xs = taps(in_w, out_w);
    let ys = taps(in_h, out_h);
    let mut out = Vec::with_capacity(out_w * out_h);
    for &(y0, y1, fy) in &ys {
        let (r0, r1) = (plane.row(y0), plane.row(y1));
        for &(x0, x1, fx) in &xs {
            let top = r0[x0] + (r0[x1] - r0[x0]) * fx;
            let bottom = r1[x0] + (r1[x1] - r1[x0]) * fx;
            out.push(top + (bottom - top) * fy);
        }
    }
    Plane::from_raw(out_w, out_h, out)
}

/// Resamples every MS band to the working size of `method`.
pub fn working_ms(ms: &MultibandImage, method: &FusionMethod, pan_w: usize, pan_h: usize) -> MultibandImage {
    let (w, h) = method.working_size(pan_w, pan_h);
    ms.map_bands(|b| resample_bilinear(b, w, h))
        .expect("resampled bands share one size")
}

fn upsample_to(pan: &Plane, ms: &MultibandImage) -> Result<MultibandImage> {
    let (w, h) = pan.dims();
    if ms.width() > w || ms.height() > h {
        return Err(Error::DimensionMismatch("MS larger than PAN"));
    }
    ms.map_bands(|b| resample_bilinear(b, w, h))
}

pub fn fuse_wa(pan: &Plane, ms: &MultibandImage, weight: f32) -> Result<MultibandImage> {
    check_weight(weight)?;
    let up = upsample_to(pan, ms)?;
    let rest = 1.0 - weight;
    up.map_bands(|band| {
        let samples = pan
            .samples()
            .iter()
            .zip(band.samples())
            .map(|(&p, &m)| weight * p + rest * m)
            .collect();
        Plane::from_raw(pan.width(), pan.height(), samples)
    })
}

pub fn fuse_ihs(pan: &Plane, ms: &MultibandImage) -> Result<MultibandImage> {
    FusionMethod::Ihs.validate(ms.band_count())?;
    let up = upsample_to(pan, ms)?;
    let [r, g, b] = [0, 1, 2].map(|k| up.bands()[k].samples());
    let delta: Vec<f32> = pan
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &p)| p - (r[i] + g[i] + b[i]) / 3.0)
        .collect();
    up.map_bands(|band| {
        let samples = band.samples().iter().zip(&delta).map(|(&m, &d)| m + d).collect();
        Plane::from_raw(pan.width(), pan.height(), samples)
    })
}

/// Replaces the LL quadrant of the PAN transform with `ms_band` (scaled by
/// the transform's DC gain) and inverts.
pub fn fuse_dwt(pan: &Plane, ms_band: &Plane, kind: WaveletKind) -> Result<Plane> {
    let (w, h) = pan.dims();
    if w % 2 != 0 || h % 2 != 0 {
        return Err(Error::OddDimension { width: w, height: h });
    }
    if ms_band.dims() != (w / 2, h / 2) {
        return Err(Error::DimensionMismatch("MS band must be half the PAN size"));
    }
    let coeffs = dwt2d_forward(pan, kind)?;
    let gain = kind.dc_gain();
    let mut samples = coeffs.into_samples();
    for y in 0..h / 2 {
        let dst = &mut samples[y * w..y * w + w / 2];
        for (d, &m) in dst.iter_mut().zip(ms_band.row(y)) {
            *d = m * gain;
        }
    }
    dwt2d_inverse(&Plane::from_raw(w, h, samples), kind)
}

/// Fuses all MS bands with `method`, resampling them as the method needs.
pub fn fuse(pan: &Plane, ms: &MultibandImage, method: FusionMethod) -> Result<MultibandImage> {
    method.validate(ms.band_count())?;
    let (w, h) = pan.dims();
    if ms.width() > w || ms.height() > h {
        return Err(Error::DimensionMismatch("MS larger than PAN"));
    }
    match method {
        FusionMethod::WeightedAverage { weight } => fuse_wa(pan, ms, weight),
        FusionMethod::Ihs => fuse_ihs(pan, ms),
        FusionMethod::DwtReplace(kind) => {
            if w % 2 != 0 || h % 2 != 0 {
                return Err(Error::OddDimension { width: w, height: h });
            }
            let half = working_ms(ms, &method, w, h);
            let bands = half
                .bands()
                .iter()
                .map(|b| fuse_dwt(pan, b, kind))
                .collect::<Result<Vec<_>>>()?;
            MultibandImage::new(bands)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn constant(w: usize, h: usize, v: f32, bands: usize) -> MultibandImage {
        MultibandImage::new(vec![Plane::filled(w, h, v); bands]).unwrap()
    }

    #[test]
    fn resample_identity_and_constant() {
        let p = Plane::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(resample_bilinear(&p, 2, 2), p);
        let c = Plane::filled(3, 5, 7.25);
        let r = resample_bilinear(&c, 11, 4);
        assert!(r.samples().iter().all(|&v| v == 7.25));
    }

    #[test]
    fn resample_pixel_center_alignment() {
        let p = Plane::new(2, 1, vec![0.0, 10.0]).unwrap();
        let r = resample_bilinear(&p, 4, 1);
        assert_eq!(r.samples(), &[0.0, 2.5, 7.5, 10.0]);
    }

    #[test]
    fn wa_examples() {
        let pan = Plane::filled(4, 4, 200.0);
        let ms = constant(2, 2, 100.0, 2);
        let f = fuse_wa(&pan, &ms, 0.5).unwrap();
        assert!(f.bands().iter().all(|b| b.samples().iter().all(|&v| v == 150.0)));

        let pan = Plane::from_fn(4, 4, |x, y| (x * 7 + y * 3) as f32);
        let ms = MultibandImage::single(Plane::from_fn(2, 2, |x, y| (x + 10 * y) as f32));
        let f = fuse_wa(&pan, &ms, 1.0).unwrap();
        assert_eq!(f.bands()[0], pan);
        let f = fuse_wa(&pan, &ms, 0.0).unwrap();
        assert_eq!(f.bands()[0], resample_bilinear(&ms.bands()[0], 4, 4));
        assert_eq!(fuse_wa(&pan, &ms, 1.5), Err(Error::WeightOutOfRange(1.5)));
        assert!(fuse_wa(&pan, &ms, f32::NAN).is_err());
    }

    #[test]
    fn ihs_gray_scene() {
        let pan = Plane::filled(4, 4, 25.0);
        let ms = constant(2, 2, 10.0, 3);
        let f = fuse_ihs(&pan, &ms).unwrap();
        assert!(f.bands().iter().all(|b| b.samples().iter().all(|&v| v == 25.0)));
    }

    #[test]
    fn ihs_zero_injection() {
        let ms = MultibandImage::new(vec![
            Plane::from_fn(4, 4, |x, _| x as f32 * 3.0),
            Plane::from_fn(4, 4, |_, y| y as f32 * 6.0),
            Plane::from_fn(4, 4, |x, y| (x + y) as f32 * 3.0),
        ])
        .unwrap();
        let pan = Plane::from_fn(4, 4, |x, y| (x * 3 + y * 6 + (x + y) * 3) as f32 / 3.0);
        let f = fuse_ihs(&pan, &ms).unwrap();
        assert_eq!(f, ms);
    }

    #[test]
    fn ihs_requires_three_bands() {
        let pan = Plane::filled(4, 4, 1.0);
        assert_eq!(
            fuse_ihs(&pan, &constant(2, 2, 1.0, 4)),
            Err(Error::BandCountMismatch {
                expected: 3,
                found: 4
            })
        );
        assert!(fuse(&pan, &constant(2, 2, 1.0, 4), FusionMethod::Ihs).is_err());
    }

    #[test]
    fn dwt_constant_scene() {
        let pan = Plane::filled(4, 4, 100.0);
        let ms = Plane::filled(2, 2, 50.0);
        for kind in [WaveletKind::Haar, WaveletKind::Daubechies4] {
            let f = fuse_dwt(&pan, &ms, kind).unwrap();
            assert!(
                f.samples().iter().all(|&v| (v - 50.0).abs() < 1e-4),
                "{kind:?}: {:?}",
                f.samples()
            );
        }
    }

    #[test]
    fn haar_shift_example() {
        let pan = Plane::new(2, 2, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        let ms = Plane::filled(1, 1, 10.0);
        let f = fuse_dwt(&pan, &ms, WaveletKind::Haar).unwrap();
        assert_eq!(f.samples(), &[7.0, 9.0, 11.0, 13.0]);
    }

    #[test]
    fn dwt_errors() {
        let pan = Plane::filled(6, 4, 1.0);
        assert!(matches!(
            fuse_dwt(&pan, &Plane::filled(2, 2, 1.0), WaveletKind::Haar),
            Err(Error::DimensionMismatch(_))
        ));
        let odd = Plane::filled(5, 4, 1.0);
        assert!(matches!(
            fuse_dwt(&odd, &Plane::filled(2, 2, 1.0), WaveletKind::Haar),
            Err(Error::OddDimension { .. })
        ));
        let ms = MultibandImage::single(Plane::filled(2, 2, 1.0));
        assert!(matches!(
            fuse(&odd, &ms, FusionMethod::DwtReplace(WaveletKind::Haar)),
            Err(Error::OddDimension { .. })
        ));
    }

    #[test]
    fn dispatcher_resamples_ms() {
        let pan = Plane::filled(8, 8, 100.0);
        let ms = constant(3, 3, 50.0, 2);
        let f = fuse(&pan, &ms, FusionMethod::DwtReplace(WaveletKind::Haar)).unwrap();
        assert_eq!(f.dims(), (8, 8));
        assert_eq!(f.band_count(), 2);
        assert!(f.bands().iter().all(|b| b.samples().iter().all(|&v| v == 50.0)));
        let big = constant(9, 8, 1.0, 1);
        assert!(fuse(&pan, &big, FusionMethod::Ihs).is_err());
    }

    #[test]
    fn dispatcher_is_transparent_at_working_size() {
        let pan = Plane::from_fn(8, 8, |x, y| ((x * 31 + y * 17) % 256) as f32);
        let half = Plane::from_fn(4, 4, |x, y| ((x * 5 + y * 11) % 256) as f32);
        let ms = MultibandImage::single(half.clone());
        let kind = WaveletKind::Daubechies4;
        assert_eq!(
            fuse(&pan, &ms, FusionMethod::DwtReplace(kind)).unwrap().bands()[0],
            fuse_dwt(&pan, &half, kind).unwrap()
        );
        let full = MultibandImage::single(pan.map(|v| 255.0 - v));
        assert_eq!(
            fuse(&pan, &full, FusionMethod::WeightedAverage { weight: 0.3 }).unwrap(),
            fuse_wa(&pan, &full, 0.3).unwrap()
        );
    }
}

//! Raster containers.
//!
//! [`Raster8`] is the storage and transfer representation (8 bits per
//! sample). [`Plane`] is the compute representation: one band of `f32`
//! samples kept on the native 0..255 scale. Conversion between the two is
//! [`to_plane`] and [`quantize`].

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// 8-bit raster, row-major, channel-interleaved. One or three channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster8 {
    width: usize,
    height: usize,
    channels: usize,
    samples: Vec<u8>,
}

impl Raster8 {
    pub fn new(width: usize, height: usize, channels: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster("zero dimension"));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidRaster("channel count must be 1 or 3"));
        }
        if samples.len() != width * height * channels {
            return Err(Error::InvalidRaster("sample count does not match dimensions"));
        }
        Ok(Self {
            width,
            height,
            channels,
            samples,
        })
    }

    /// Interleaves single-channel rasters into one raster. Accepts one or
    /// three inputs of equal size.
    pub fn interleave(parts: &[Raster8]) -> Result<Self> {
        let first = parts.first().ok_or(Error::InvalidRaster("no channels"))?;
        if parts.len() != 1 && parts.len() != 3 {
            return Err(Error::InvalidRaster("channel count must be 1 or 3"));
        }
        if parts
            .iter()
            .any(|p| p.channels != 1 || p.width != first.width || p.height != first.height)
        {
            return Err(Error::DimensionMismatch("interleaved rasters differ in shape"));
        }
        let n = first.width * first.height;
        let mut samples = Vec::with_capacity(n * parts.len());
        for i in 0..n {
            samples.extend(parts.iter().map(|p| p.samples[i]));
        }
        Raster8::new(first.width, first.height, parts.len(), samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }
}

/// One band of finite `f32` samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    samples: Vec<f32>,
}

impl Plane {
    pub fn new(width: usize, height: usize, samples: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidRaster("zero dimension"));
        }
        if samples.len() != width * height {
            return Err(Error::InvalidRaster("sample count does not match dimensions"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidRaster("non-finite sample"));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    /// Caller guarantees `samples.len() == width * height` and finiteness.
    pub(crate) fn from_raw(width: usize, height: usize, samples: Vec<f32>) -> Self {
        debug_assert_eq!(samples.len(), width * height);
        Self {
            width,
            height,
            samples,
        }
    }

    /// A plane holding `value` everywhere. Panics on zero dimensions or a
    /// non-finite value.
    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        assert!(width > 0 && height > 0 && value.is_finite());
        Self::from_raw(width, height, vec![value; width * height])
    }

    /// Builds a plane from `f(x, y)`. Panics if `f` returns a non-finite value.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        assert!(width > 0 && height > 0);
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let v = f(x, y);
                assert!(v.is_finite(), "non-finite sample at ({x}, {y})");
                samples.push(v);
            }
        }
        Self::from_raw(width, height, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.samples[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f32] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    /// Copies the `width x height` window whose top-left corner is `(x0, y0)`.
    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Plane> {
        if width == 0 || height == 0 || x0 + width > self.width || y0 + height > self.height {
            return Err(Error::DimensionMismatch("crop window outside the plane"));
        }
        let mut samples = Vec::with_capacity(width * height);
        for y in y0..y0 + height {
            samples.extend_from_slice(&self.row(y)[x0..x0 + width]);
        }
        Ok(Plane::from_raw(width, height, samples))
    }

    /// Writes `src` into this plane with its top-left corner at `(x0, y0)`.
    pub fn paste(&mut self, x0: usize, y0: usize, src: &Plane) -> Result<()> {
        if x0 + src.width > self.width || y0 + src.height > self.height {
            return Err(Error::DimensionMismatch("paste window outside the plane"));
        }
        for y in 0..src.height {
            let start = (y0 + y) * self.width + x0;
            self.samples[start..start + src.width].copy_from_slice(src.row(y));
        }
        Ok(())
    }

    /// Applies `f` to every sample. Panics if `f` produces a non-finite value.
    pub fn map(&self, mut f: impl FnMut(f32) -> f32) -> Plane {
        let samples: Vec<f32> = self.samples.iter().map(|&v| f(v)).collect();
        assert!(samples.iter().all(|v| v.is_finite()), "map produced a non-finite sample");
        Plane::from_raw(self.width, self.height, samples)
    }
}

/// Ordered bands of identical size.
#[derive(Debug, Clone, PartialEq)]
pub struct MultibandImage {
    bands: Vec<Plane>,
}

impl MultibandImage {
    pub fn new(bands: Vec<Plane>) -> Result<Self> {
        let first = bands.first().ok_or(Error::InvalidRaster("no bands"))?;
        let dims = first.dims();
        if bands.iter().any(|b| b.dims() != dims) {
            return Err(Error::DimensionMismatch("bands differ in size"));
        }
        Ok(Self { bands })
    }

    pub fn single(band: Plane) -> Self {
        Self { bands: vec![band] }
    }

    pub fn bands(&self) -> &[Plane] {
        &self.bands
    }

    pub fn into_bands(self) -> Vec<Plane> {
        self.bands
    }

    pub fn band_count(&self) -> usize {
        self.bands.len()
    }

    pub fn width(&self) -> usize {
        self.bands[0].width()
    }

    pub fn height(&self) -> usize {
        self.bands[0].height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.bands[0].dims()
    }

    pub fn map_bands(&self, f: impl FnMut(&Plane) -> Plane) -> Result<MultibandImage> {
        MultibandImage::new(self.bands.iter().map(f).collect())
    }
}

/// Extracts one channel as a float plane on the 0..255 scale.
pub fn to_plane(raster: &Raster8, channel: usize) -> Result<Plane> {
    if channel >= raster.channels {
        return Err(Error::ChannelOutOfRange {
            channel,
            channels: raster.channels,
        });
    }
    let samples = raster
        .samples
        .iter()
        .skip(channel)
        .step_by(raster.channels)
        .map(|&v| f32::from(v))
        .collect();
    Ok(Plane::from_raw(raster.width, raster.height, samples))
}

/// Splits every channel of a raster into its own plane.
pub fn to_bands(raster: &Raster8) -> MultibandImage {
    let bands = (0..raster.channels)
        .map(|c| to_plane(raster, c).expect("channel index in range"))
        .collect();
    MultibandImage { bands }
}

/// Clamp to `[0, 255]`, then round half away from zero.
#[inline]
pub fn quantize_sample(v: f32) -> u8 {
    libm::roundf(v.clamp(0.0, 255.0)) as u8
}

/// Quantizes a plane to a single-channel 8-bit raster.
pub fn quantize(plane: &Plane) -> Raster8 {
    let samples = plane.samples.iter().map(|&v| quantize_sample(v)).collect();
    Raster8 {
        width: plane.width,
        height: plane.height,
        channels: 1,
        samples,
    }
}

/// Snaps every sample onto the 8-bit lattice, keeping the float representation.
pub fn quantize_in_place(plane: &mut Plane) {
    for v in plane.samples.iter_mut() {
        *v = f32::from(quantize_sample(*v));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn to_plane_is_identity_embedding() {
        let r = Raster8::new(2, 2, 1, vec![0, 128, 255, 64]).unwrap();
        let p = to_plane(&r, 0).unwrap();
        assert_eq!(p.samples(), &[0.0, 128.0, 255.0, 64.0]);
    }

    #[test]
    fn to_plane_picks_every_third_sample() {
        let r = Raster8::new(2, 1, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        assert_eq!(to_plane(&r, 2).unwrap().samples(), &[3.0, 6.0]);
        assert_eq!(to_plane(&r, 0).unwrap().samples(), &[1.0, 4.0]);
    }

    #[test]
    fn channel_out_of_range() {
        let r = Raster8::new(1, 1, 3, vec![1, 2, 3]).unwrap();
        assert_eq!(
            to_plane(&r, 3),
            Err(Error::ChannelOutOfRange {
                channel: 3,
                channels: 3
            })
        );
    }

    #[test]
    fn quantize_clamps_then_rounds() {
        let p = Plane::new(4, 1, vec![-3.2, 0.4, 127.5, 300.0]).unwrap();
        assert_eq!(quantize(&p).samples(), &[0, 0, 128, 255]);
        let p = Plane::new(3, 1, vec![0.5, 254.5, 1.49]).unwrap();
        assert_eq!(quantize(&p).samples(), &[1, 255, 1]);
    }

    #[test]
    fn quantize_keeps_lattice_values() {
        let values: Vec<f32> = (0..=255).map(|v| v as f32).collect();
        let p = Plane::new(256, 1, values).unwrap();
        let q = quantize(&p);
        assert!(q.samples().iter().enumerate().all(|(i, &v)| v as usize == i));
    }

    #[test]
    fn plane_rejects_non_finite() {
        assert!(Plane::new(1, 1, vec![f32::NAN]).is_err());
        assert!(Plane::new(2, 1, vec![1.0]).is_err());
    }

    #[test]
    fn raster_invariants() {
        assert!(Raster8::new(1, 1, 2, vec![0, 0]).is_err());
        assert!(Raster8::new(2, 2, 1, vec![0; 3]).is_err());
        assert!(Raster8::new(0, 2, 1, vec![]).is_err());
    }

    #[test]
    fn crop_and_paste() {
        let p = Plane::from_fn(4, 3, |x, y| (y * 4 + x) as f32);
        let c = p.crop(1, 1, 2, 2).unwrap();
        assert_eq!(c.samples(), &[5.0, 6.0, 9.0, 10.0]);
        let mut z = Plane::filled(4, 3, 0.0);
        z.paste(1, 1, &c).unwrap();
        assert_eq!(z.get(2, 2), 10.0);
        assert_eq!(z.get(0, 0), 0.0);
        assert!(p.crop(3, 0, 2, 1).is_err());
    }

    #[test]
    fn interleave_three_channels() {
        let r = Raster8::new(2, 1, 1, vec![1, 2]).unwrap();
        let g = Raster8::new(2, 1, 1, vec![3, 4]).unwrap();
        let b = Raster8::new(2, 1, 1, vec![5, 6]).unwrap();
        let rgb = Raster8::interleave(&[r, g, b]).unwrap();
        assert_eq!(rgb.samples(), &[1, 3, 5, 2, 4, 6]);
    }
}

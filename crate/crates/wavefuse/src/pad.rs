//! Edge padding so arbitrary scene sizes fit a tile grid.

use wavefuse_core::fusion::resample_bilinear;
use wavefuse_core::{MultibandImage, Plane};

use crate::error::Result;

/// Smallest size at or above `len` divisible by `2 * parts`, so each tile
/// is even and the MS half size is whole.
pub fn padded_len(len: usize, parts: usize) -> usize {
    let step = 2 * parts.max(1);
    len.div_ceil(step) * step
}

/// Extends `plane` to `width x height` by replicating its last column and
/// row.
pub fn pad_edge(plane: &Plane, width: usize, height: usize) -> Plane {
    let (w, h) = plane.dims();
    Plane::from_fn(width, height, |x, y| plane.get(x.min(w - 1), y.min(h - 1)))
}

/// Inputs ready for a `grid_w x grid_h` job, plus the original PAN size to
/// crop back to.
pub struct Padded {
    pub pan: Plane,
    pub ms: MultibandImage,
    pub original: (usize, usize),
}

impl Padded {
    pub fn is_padded(&self) -> bool {
        self.pan.dims() != self.original
    }

    pub fn crop(&self, fused: &MultibandImage) -> Result<MultibandImage> {
        if !self.is_padded() {
            return Ok(fused.clone());
        }
        let (w, h) = self.original;
        Ok(MultibandImage::new(
            fused
                .bands()
                .iter()
                .map(|b| b.crop(0, 0, w, h))
                .collect::<Result<Vec<_>, _>>()?,
        )?)
    }
}

/// Pads PAN (and MS to match) up to the grid. MS at exactly half or full
/// PAN size is padded in step; any other MS size is first resampled to the
/// PAN size.
pub fn pad_to_grid(pan: Plane, ms: MultibandImage, grid_w: usize, grid_h: usize) -> Result<Padded> {
    let original = pan.dims();
    let (w, h) = original;
    if ms.width() > w || ms.height() > h {
        return Err(wavefuse_core::Error::DimensionMismatch("MS larger than PAN").into());
    }
    let (pw, ph) = (padded_len(w, grid_w), padded_len(h, grid_h));
    if (pw, ph) == (w, h) {
        return Ok(Padded { pan, ms, original });
    }
    let ms = if ms.dims() == (w / 2, h / 2) && w % 2 == 0 && h % 2 == 0 {
        ms.map_bands(|b| pad_edge(b, pw / 2, ph / 2))?
    } else if ms.dims() == (w, h) {
        ms.map_bands(|b| pad_edge(b, pw, ph))?
    } else {
        ms.map_bands(|b| pad_edge(&resample_bilinear(b, w, h), pw, ph))?
    };
    Ok(Padded {
        pan: pad_edge(&pan, pw, ph),
        ms,
        original,
    })
}

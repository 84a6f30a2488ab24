//! Equal-parts tile grid over a PAN/MS pair.
//!
//! The PAN plane is cut into `grid_w x grid_h` tiles of identical, even
//! size; the MS bands are cut at the matching positions. Tiles are fused
//! independently and merged back by index.
//!
//! Weighted averaging, IHS and Haar fusion give bit-identical results tiled
//! or untiled. Daubechies-4 wraps periodically at each tile edge instead of
//! the image edge, so results differ in a narrow band along tile borders.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fusion::{fuse, FusionMethod};
use crate::image::{MultibandImage, Plane};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TileGrid {
    pub grid_w: usize,
    pub grid_h: usize,
    pub pan_tile_w: usize,
    pub pan_tile_h: usize,
    pub ms_tile_w: usize,
    pub ms_tile_h: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileIndex {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub index: TileIndex,
    pub pan: Plane,
    pub ms: MultibandImage,
}

pub fn plan_grid(pan_w: usize, pan_h: usize, grid_w: usize, grid_h: usize) -> Result<TileGrid> {
    if grid_w == 0 || grid_h == 0 {
        return Err(Error::DimensionMismatch("grid counts must be at least 1"));
    }
    if pan_w % grid_w != 0 || pan_h % grid_h != 0 || pan_w == 0 || pan_h == 0 {
        return Err(Error::NotDivisible {
            width: pan_w,
            height: pan_h,
            factor: if pan_w % grid_w != 0 { grid_w } else { grid_h },
        });
    }
    let (tw, th) = (pan_w / grid_w, pan_h / grid_h);
    if tw % 2 != 0 || th % 2 != 0 {
        return Err(Error::OddTile {
            width: tw,
            height: th,
        });
    }
    Ok(TileGrid {
        grid_w,
        grid_h,
        pan_tile_w: tw,
        pan_tile_h: th,
        ms_tile_w: tw / 2,
        ms_tile_h: th / 2,
    })
}

impl TileGrid {
    pub fn tile_count(&self) -> usize {
        self.grid_w * self.grid_h
    }

    pub fn pan_dims(&self) -> (usize, usize) {
        (self.grid_w * self.pan_tile_w, self.grid_h * self.pan_tile_h)
    }

    /// Row-major position of a tile.
    pub fn ordinal(&self, index: TileIndex) -> Result<usize> {
        if index.row >= self.grid_h || index.col >= self.grid_w {
            return Err(Error::TileOutOfRange {
                row: index.row,
                col: index.col,
            });
        }
        Ok(index.row * self.grid_w + index.col)
    }

    pub fn index_of(&self, ordinal: usize) -> TileIndex {
        TileIndex {
            row: ordinal / self.grid_w,
            col: ordinal % self.grid_w,
        }
    }

    pub fn indices(&self) -> impl Iterator<Item = TileIndex> + '_ {
        (0..self.tile_count()).map(|i| self.index_of(i))
    }

    /// Pixel offset of a tile within a raster of `width x height` laid over
    /// the same grid.
    fn offset(&self, index: TileIndex, width: usize, height: usize) -> (usize, usize) {
        (
            index.col * width / self.grid_w,
            index.row * height / self.grid_h,
        )
    }
}

/// Cuts the PAN plane and MS bands into row-major tiles. The MS bands may
/// be at half the PAN size (the grid's MS tiles) or at full PAN size.
pub fn split(pan: &Plane, ms: &MultibandImage, grid: &TileGrid) -> Result<Vec<Tile>> {
    if pan.dims() != grid.pan_dims() {
        return Err(Error::DimensionMismatch("PAN does not match the grid"));
    }
    let (ms_tw, ms_th) = if ms.dims() == (grid.grid_w * grid.ms_tile_w, grid.grid_h * grid.ms_tile_h) {
        (grid.ms_tile_w, grid.ms_tile_h)
    } else if ms.dims() == pan.dims() {
        (grid.pan_tile_w, grid.pan_tile_h)
    } else {
        return Err(Error::DimensionMismatch("MS does not match the grid"));
    };
    grid.indices()
        .map(|index| {
            let (px, py) = grid.offset(index, pan.width(), pan.height());
            let (mx, my) = grid.offset(index, ms.width(), ms.height());
            let bands = ms
                .bands()
                .iter()
                .map(|b| b.crop(mx, my, ms_tw, ms_th))
                .collect::<Result<Vec<_>>>()?;
            Ok(Tile {
                index,
                pan: pan.crop(px, py, grid.pan_tile_w, grid.pan_tile_h)?,
                ms: MultibandImage::new(bands)?,
            })
        })
        .collect()
}

/// Places fused tiles at their grid positions. Every index must appear
/// exactly once and all tiles must share one band count and the grid's PAN
/// tile size.
pub fn merge(
    tiles: impl IntoIterator<Item = (TileIndex, MultibandImage)>,
    grid: &TileGrid,
) -> Result<MultibandImage> {
    let mut slots: Vec<Option<MultibandImage>> = vec![None; grid.tile_count()];
    for (index, image) in tiles {
        let ord = grid.ordinal(index)?;
        if image.dims() != (grid.pan_tile_w, grid.pan_tile_h) {
            return Err(Error::DimensionMismatch("tile size does not match the grid"));
        }
        if slots[ord].replace(image).is_some() {
            return Err(Error::DuplicateTile {
                row: index.row,
                col: index.col,
            });
        }
    }
    let mut band_count = None;
    for (ord, slot) in slots.iter().enumerate() {
        let index = grid.index_of(ord);
        let image = slot.as_ref().ok_or(Error::MissingTile {
            row: index.row,
            col: index.col,
        })?;
        if *band_count.get_or_insert(image.band_count()) != image.band_count() {
            return Err(Error::DimensionMismatch("tiles differ in band count"));
        }
    }
    let (w, h) = grid.pan_dims();
    let mut bands = vec![Plane::filled(w, h, 0.0); band_count.unwrap_or(0)];
    for (ord, slot) in slots.into_iter().enumerate() {
        let image = slot.expect("checked above");
        let (x, y) = grid.offset(grid.index_of(ord), w, h);
        for (dst, src) in bands.iter_mut().zip(image.bands()) {
            dst.paste(x, y, src)?;
        }
    }
    MultibandImage::new(bands)
}

/// Fuses one tile.
pub fn fuse_tile(tile: &Tile, method: FusionMethod) -> Result<MultibandImage> {
    fuse(&tile.pan, &tile.ms, method)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_examples() {
        let g = plan_grid(16280, 14960, 2, 2).unwrap();
        assert_eq!((g.pan_tile_w, g.pan_tile_h), (8140, 7480));
        assert_eq!((g.ms_tile_w, g.ms_tile_h), (4070, 3740));
        let g = plan_grid(8, 8, 2, 2).unwrap();
        assert_eq!((g.pan_tile_w, g.pan_tile_h), (4, 4));
        assert!(matches!(plan_grid(10, 10, 4, 1), Err(Error::NotDivisible { .. })));
        assert_eq!(
            plan_grid(6, 8, 2, 1),
            Err(Error::OddTile {
                width: 3,
                height: 8
            })
        );
        assert!(plan_grid(8, 8, 0, 1).is_err());
    }

    #[test]
    fn split_layout() {
        let pan = Plane::from_fn(4, 4, |x, y| (y * 4 + x) as f32);
        let ms = MultibandImage::single(Plane::from_fn(2, 2, |x, y| (y * 2 + x) as f32));
        let grid = plan_grid(4, 4, 2, 2).unwrap();
        let tiles = split(&pan, &ms, &grid).unwrap();
        assert_eq!(tiles.len(), 4);
        assert_eq!(tiles[1].index, TileIndex { row: 0, col: 1 });
        assert_eq!(tiles[1].pan.samples(), &[2.0, 3.0, 6.0, 7.0]);
        assert_eq!(tiles[2].pan.samples(), &[8.0, 9.0, 12.0, 13.0]);
        assert_eq!(tiles[3].ms.bands()[0].samples(), &[3.0]);
    }

    #[test]
    fn single_tile_is_input() {
        let pan = Plane::from_fn(6, 4, |x, y| (x * y) as f32);
        let ms = MultibandImage::single(Plane::from_fn(3, 2, |x, y| (x + y) as f32));
        let grid = plan_grid(6, 4, 1, 1).unwrap();
        let tiles = split(&pan, &ms, &grid).unwrap();
        assert_eq!(tiles.len(), 1);
        assert_eq!(tiles[0].pan, pan);
        assert_eq!(tiles[0].ms, ms);
    }

    #[test]
    fn merge_reports_missing_and_duplicate() {
        let grid = plan_grid(4, 4, 2, 2).unwrap();
        let t = |r, c| {
            (
                TileIndex { row: r, col: c },
                MultibandImage::single(Plane::filled(2, 2, 1.0)),
            )
        };
        assert_eq!(
            merge([t(0, 0), t(0, 1), t(1, 1)], &grid),
            Err(Error::MissingTile { row: 1, col: 0 })
        );
        assert_eq!(
            merge([t(0, 0), t(0, 1), t(1, 1), t(0, 1)], &grid),
            Err(Error::DuplicateTile { row: 0, col: 1 })
        );
        assert!(matches!(
            merge([t(2, 0)], &grid),
            Err(Error::TileOutOfRange { .. })
        ));
        assert!(merge([t(0, 0), t(0, 1), t(1, 0), t(1, 1)], &grid).is_ok());
    }

    #[test]
    fn split_rejects_mismatched_ms() {
        let pan = Plane::filled(8, 8, 0.0);
        let ms = MultibandImage::single(Plane::filled(3, 3, 0.0));
        let grid = plan_grid(8, 8, 2, 2).unwrap();
        assert!(matches!(split(&pan, &ms, &grid), Err(Error::DimensionMismatch(_))));
    }
}

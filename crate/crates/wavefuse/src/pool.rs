//! In-process tiled fusion on a fixed pool of threads.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use wavefuse_core::fusion::working_ms;
use wavefuse_core::image::quantize_in_place;
use wavefuse_core::tiling::{fuse_tile, merge, split};
use wavefuse_core::wire::wire_method;
use wavefuse_core::{FusionMethod, MultibandImage, Plane, TileGrid};

use crate::error::Result;

/// How tile data is represented between split and fuse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transfer {
    /// Samples stay `f32` throughout.
    Float,
    /// Inputs and outputs snap to the 8-bit lattice and the WA weight to
    /// thousandths, as on the byte wire. Matches a distributed run.
    Quantized8,
}

/// Fuses `pan`/`ms` tile by tile with `workers` threads. Tiles are pulled
/// from a shared counter and merged by grid position, so the output does
/// not depend on scheduling.
pub fn fuse_tiled(
    pan: &Plane,
    ms: &MultibandImage,
    method: FusionMethod,
    grid: &TileGrid,
    workers: usize,
) -> Result<MultibandImage> {
    fuse_tiled_with(pan, ms, method, grid, workers, Transfer::Float)
}

pub fn fuse_tiled_with(
    pan: &Plane,
    ms: &MultibandImage,
    method: FusionMethod,
    grid: &TileGrid,
    workers: usize,
    transfer: Transfer,
) -> Result<MultibandImage> {
    check_inputs(pan, ms, &method)?;
    let (w, h) = pan.dims();
    let work = working_ms(ms, &method, w, h);
    let mut tiles = split(pan, &work, grid)?;
    let method = match transfer {
        Transfer::Float => method,
        Transfer::Quantized8 => {
            for tile in &mut tiles {
                snap_tile(&mut tile.pan, &mut tile.ms)?;
            }
            wire_method(&method)
        }
    };

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<MultibandImage>>>> =
        Mutex::new((0..tiles.len()).map(|_| None).collect());
    let threads = workers.clamp(1, tiles.len().max(1));
    thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(tile) = tiles.get(i) else { break };
                let out = fuse_tile(tile, method).map_err(Into::into).and_then(|mut img| {
                    if transfer == Transfer::Quantized8 {
                        img = img.map_bands(snapped)?;
                    }
                    Ok(img)
                });
                slots.lock().expect("pool slot lock")[i] = Some(out);
            });
        }
    });

    let slots = slots.into_inner().expect("pool slot lock");
    let mut fused = Vec::with_capacity(slots.len());
    for (tile, slot) in tiles.iter().zip(slots) {
        fused.push((tile.index, slot.expect("every tile visited")?));
    }
    Ok(merge(fused, grid)?)
}

/// Band count and size checks shared by the local and distributed paths.
pub(crate) fn check_inputs(pan: &Plane, ms: &MultibandImage, method: &FusionMethod) -> Result<()> {
    method.validate(ms.band_count())?;
    if ms.width() > pan.width() || ms.height() > pan.height() {
        return Err(wavefuse_core::Error::DimensionMismatch("MS larger than PAN").into());
    }
    Ok(())
}

fn snapped(p: &Plane) -> Plane {
    let mut p = p.clone();
    quantize_in_place(&mut p);
    p
}

fn snap_tile(pan: &mut Plane, ms: &mut MultibandImage) -> Result<()> {
    quantize_in_place(pan);
    *ms = ms.map_bands(snapped)?;
    Ok(())
}

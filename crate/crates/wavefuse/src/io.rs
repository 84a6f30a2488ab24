//! PGM/PPM files on disk.

use std::fs;
use std::path::{Path, PathBuf};

use wavefuse_core::image::{quantize, to_bands, to_plane};
use wavefuse_core::pnm::{read_pnm, write_pnm};
use wavefuse_core::{MultibandImage, Plane, Raster8};

use crate::error::{Error, Result};

pub fn read_raster(path: &Path) -> Result<Raster8> {
    let bytes = fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_pnm(&bytes).map_err(|source| Error::Format {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_raster(path: &Path, raster: &Raster8) -> Result<()> {
    fs::write(path, write_pnm(raster)).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a single-channel image as a plane.
pub fn read_gray(path: &Path) -> Result<Plane> {
    let raster = read_raster(path)?;
    if raster.channels() != 1 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            source: wavefuse_core::Error::UnsupportedFormat("expected a single-channel PGM"),
        });
    }
    Ok(to_plane(&raster, 0)?)
}

/// Loads MS bands from one PGM, one PPM, or several PGMs (one band each).
pub fn read_bands(paths: &[PathBuf]) -> Result<MultibandImage> {
    match paths {
        [] => Err(Error::Usage("at least one MS image is required".into())),
        [single] => Ok(to_bands(&read_raster(single)?)),
        many => {
            let bands = many.iter().map(|p| read_gray(p)).collect::<Result<Vec<_>>>()?;
            MultibandImage::new(bands).map_err(|_| {
                Error::Usage("MS images differ in size".into())
            })
        }
    }
}

/// Output paths for `bands` bands: the path itself for one or three bands,
/// otherwise `<stem>_b<k>.<ext>` per band.
pub fn band_paths(out: &Path, bands: usize) -> Vec<PathBuf> {
    if bands == 1 || bands == 3 {
        return vec![out.to_path_buf()];
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("fused");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("pgm");
    (0..bands)
        .map(|k| out.with_file_name(format!("{stem}_b{k}.{ext}")))
        .collect()
}

/// Quantizes and writes fused bands: a PPM for three bands, otherwise one
/// PGM per band. Returns the written paths.
pub fn write_bands(out: &Path, image: &MultibandImage) -> Result<Vec<PathBuf>> {
    let gray: Vec<Raster8> = image.bands().iter().map(quantize).collect();
    let paths = band_paths(out, gray.len());
    if gray.len() == 3 {
        write_raster(&paths[0], &Raster8::interleave(&gray)?)?;
    } else {
        for (path, raster) in paths.iter().zip(&gray) {
            write_raster(path, raster)?;
        }
    }
    Ok(paths)
}

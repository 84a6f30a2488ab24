//! Pan-sharpening kernels.
//!
//! Fuses a high-resolution panchromatic (PAN) plane with lower-resolution
//! multispectral (MS) bands. Everything here is allocation-only `no_std`
//! code: the raster types and their 8-bit storage form, single-level Haar
//! and Daubechies-4 wavelet transforms, the four fusion methods, quality
//! metrics, the equal-parts tile grid, and the binary framing used to ship
//! tiles between a master and its workers.
//!
//! Threading, sockets and files live in the `wavefuse` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;
pub mod fusion;
pub mod image;
pub mod metrics;
pub mod pnm;
pub mod tiling;
pub mod wavelet;
pub mod wire;

pub use error::{Error, Result};
pub use fusion::{fuse, FusionMethod};
pub use image::{MultibandImage, Plane, Raster8};
pub use metrics::QualityReport;
pub use tiling::{Tile, TileGrid, TileIndex};
pub use wavelet::WaveletKind;

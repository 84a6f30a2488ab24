//! Files, threads, sockets and the command line around `wavefuse-core`.

pub mod bench;
pub mod cli;
pub mod cluster;
pub mod error;
pub mod io;
pub mod pad;
pub mod pool;

pub use error::{Error, Result};
pub use pool::{fuse_tiled, fuse_tiled_with, Transfer};

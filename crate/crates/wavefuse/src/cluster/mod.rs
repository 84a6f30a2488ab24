//! Master/worker distribution of tiles over TCP.

pub mod master;
mod net;
pub mod worker;

pub use master::{run_master, shutdown_worker, MasterConfig};
pub use worker::{process_task, run_worker, WorkerExit};

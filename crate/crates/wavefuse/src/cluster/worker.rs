//! Worker node: serves one master connection at a time.

use std::io;
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::Duration;

use log::{debug, info, warn};
use wavefuse_core::fuse;
use wavefuse_core::wire::{
    ErrorPayload, MessageType, ResultPayload, SampleEncoding, TaskPayload, WireMessage,
};
use wavefuse_core::TileIndex;

use super::net::{no_idle, read_message, write_message, ReadError};
use crate::error::Result;

const POLL: Duration = Duration::from_millis(50);

/// Why [`run_worker`] returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkerExit {
    Shutdown,
    Stopped,
}

enum Connection {
    Closed,
    Shutdown,
    Stopped,
}

/// Accepts connections on `listener` until a SHUTDOWN frame arrives or
/// `stop` is raised. Connections are served one after another.
pub fn run_worker(listener: TcpListener, stop: &AtomicBool) -> Result<WorkerExit> {
    listener.set_nonblocking(true)?;
    info!("worker listening on {}", listener.local_addr()?);
    loop {
        if stop.load(Ordering::SeqCst) {
            return Ok(WorkerExit::Stopped);
        }
        match listener.accept() {
            Ok((stream, peer)) => {
                info!("master connected from {peer}");
                match serve(stream, stop) {
                    Ok(Connection::Closed) => info!("master {peer} disconnected"),
                    Ok(Connection::Shutdown) => {
                        info!("shutdown requested by {peer}");
                        return Ok(WorkerExit::Shutdown);
                    }
                    Ok(Connection::Stopped) => return Ok(WorkerExit::Stopped),
                    Err(e) => warn!("connection to {peer} dropped: {e}"),
                }
            }
            Err(e) if e.kind() == io::ErrorKind::WouldBlock => thread::sleep(POLL),
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
}

fn reason(e: &wavefuse_core::Error) -> String {
    format!("{}: {e}", e.name())
}

fn error_message(tile: Option<TileIndex>, reason: String) -> WireMessage {
    WireMessage::new(MessageType::Error, ErrorPayload { tile, reason }.encode())
}

/// Fuses one task payload into the reply frame: a RESULT, or an ERROR
/// naming the tile when it could be read.
pub fn process_task(payload: &[u8], enc: SampleEncoding) -> WireMessage {
    let tile = TaskPayload::peek_tile(payload);
    let out = TaskPayload::decode(payload, enc).and_then(|task| {
        debug!("tile ({}, {}) {}", task.tile.row, task.tile.col, task.method.label());
        let bands = fuse(&task.pan, &task.ms, task.method)?;
        ResultPayload { tile: task.tile, bands }.encode(enc)
    });
    match out {
        Ok(bytes) => WireMessage::new(enc.result_type(), bytes),
        Err(e) => {
            warn!("task failed: {e}");
            error_message(tile, reason(&e))
        }
    }
}

fn interrupted(payload: &[u8]) -> WireMessage {
    error_message(TaskPayload::peek_tile(payload), "Interrupted: worker stopping".into())
}

fn serve(mut stream: TcpStream, stop: &AtomicBool) -> io::Result<Connection> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    stream.set_read_timeout(Some(POLL))?;
    loop {
        let msg = match read_message(&mut stream, Some(stop), &mut no_idle) {
            Ok(m) => m,
            Err(ReadError::Closed) => return Ok(Connection::Closed),
            Err(ReadError::Stopped) => return Ok(Connection::Stopped),
            Err(ReadError::Frame(e)) => {
                warn!("bad frame: {e}");
                write_message(&mut stream, &error_message(None, reason(&e)))?;
                return Ok(Connection::Closed);
            }
            Err(ReadError::Io(e)) => return Err(e),
        };
        let enc = match msg.msg_type {
            MessageType::Hello => {
                write_message(&mut stream, &msg)?;
                continue;
            }
            MessageType::Shutdown => return Ok(Connection::Shutdown),
            MessageType::Task => SampleEncoding::Byte,
            MessageType::TaskExact => SampleEncoding::Float32,
            other => {
                let why = format!("UnexpectedMessage: {other:?} sent to a worker");
                write_message(&mut stream, &error_message(None, why))?;
                return Ok(Connection::Closed);
            }
        };
        let reply = process_task(&msg.payload, enc);
        if stop.load(Ordering::SeqCst) {
            write_message(&mut stream, &interrupted(&msg.payload))?;
            drain(&mut stream)?;
            return Ok(Connection::Stopped);
        }
        write_message(&mut stream, &reply)?;
    }
}

/// Answers tasks already queued on the socket with ERROR frames.
fn drain(stream: &mut TcpStream) -> io::Result<()> {
    let mut give_up = || Err(io::ErrorKind::TimedOut.into());
    while let Ok(msg) = read_message(stream, None, &mut give_up) {
        if matches!(msg.msg_type, MessageType::Task | MessageType::TaskExact) {
            write_message(stream, &interrupted(&msg.payload))?;
        }
    }
    Ok(())
}

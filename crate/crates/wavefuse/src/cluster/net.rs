//! Frame IO over a byte stream.

use std::io::{self, Read, Write};
use std::sync::atomic::{AtomicBool, Ordering};

use wavefuse_core::wire::{encode_message, FrameHeader, WireMessage, HEADER_LEN};

#[derive(Debug)]
pub enum ReadError {
    /// The peer closed the stream between frames.
    Closed,
    /// The stop flag was raised while waiting for data.
    Stopped,
    Io(io::Error),
    Frame(wavefuse_core::Error),
}

impl From<io::Error> for ReadError {
    fn from(e: io::Error) -> Self {
        ReadError::Io(e)
    }
}

impl std::fmt::Display for ReadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReadError::Closed => f.write_str("connection closed"),
            ReadError::Stopped => f.write_str("stopped"),
            ReadError::Io(e) => write!(f, "{e}"),
            ReadError::Frame(e) => write!(f, "{e}"),
        }
    }
}

fn is_timeout(e: &io::Error) -> bool {
    matches!(e.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut)
}

/// Fills `buf`, retrying on read timeouts. A timeout with nothing read yet
/// returns `Stopped` once `stop` is set; `idle` is called on each timeout
/// and may abort the wait by returning an error.
fn fill<R: Read>(
    r: &mut R,
    buf: &mut [u8],
    at_frame_start: bool,
    stop: Option<&AtomicBool>,
    idle: &mut dyn FnMut() -> io::Result<()>,
) -> Result<(), ReadError> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..]) {
            Ok(0) if got == 0 && at_frame_start => return Err(ReadError::Closed),
            Ok(0) => return Err(ReadError::Io(io::ErrorKind::UnexpectedEof.into())),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) if is_timeout(&e) => {
                if got == 0 && at_frame_start && stop.is_some_and(|s| s.load(Ordering::SeqCst)) {
                    return Err(ReadError::Stopped);
                }
                idle()?;
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// Reads one frame. The header is validated (magic, version, type, size
/// cap) before any payload is read.
pub fn read_message<R: Read>(
    r: &mut R,
    stop: Option<&AtomicBool>,
    idle: &mut dyn FnMut() -> io::Result<()>,
) -> Result<WireMessage, ReadError> {
    let mut head = [0u8; HEADER_LEN];
    fill(r, &mut head, true, stop, idle)?;
    let header = FrameHeader::decode(&head).map_err(ReadError::Frame)?;
    let mut payload = vec![0u8; header.payload_len as usize];
    fill(r, &mut payload, false, None, idle)?;
    Ok(WireMessage::new(header.msg_type, payload))
}

pub fn write_message<W: Write>(w: &mut W, msg: &WireMessage) -> io::Result<()> {
    w.write_all(&encode_message(msg))?;
    w.flush()
}

pub fn no_idle() -> io::Result<()> {
    Ok(())
}

//! Binary framing for master/worker tile exchange.
//!
//! Every frame is `magic ‖ version ‖ msg_type ‖ payload_len ‖ payload` with
//! all integers little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "WFUS"
//!      4     2  version (1)
//!      6     2  msg_type
//!      8     4  payload_len
//!     12     n  payload
//! ```
//!
//! TASK payload:
//!
//! ```text
//! u16 tile_row, u16 tile_col, u8 method, u8 wavelet, u16 wa_weight_milli,
//! u32 pan_w, u32 pan_h, u8 band_count,
//! pan samples, then band_count MS planes
//! ```
//!
//! MS planes are `(pan_w/2) x (pan_h/2)` for the wavelet methods and
//! `pan_w x pan_h` for weighted averaging and IHS. RESULT payload:
//! `u16 tile_row, u16 tile_col, u8 band_count`, then the fused planes at
//! tile size. ERROR payload: `u16 tile_row, u16 tile_col` (`0xFFFF` twice
//! when no tile applies), then a UTF-8 reason.
//!
//! TASK and RESULT carry one byte per sample. TASK_EXACT and RESULT_EXACT
//! have the same layouts with `f32` little-endian samples instead.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fusion::FusionMethod;
use crate::image::{quantize_sample, MultibandImage, Plane};
use crate::tiling::TileIndex;
use crate::wavelet::WaveletKind;

pub const MAGIC: [u8; 4] = *b"WFUS";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 12;
/// Upper bound on `payload_len`; larger frames are rejected before any
/// allocation.
pub const MAX_PAYLOAD: u32 = 256 * 1024 * 1024;

const NO_TILE: u16 = 0xFFFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u16)]
pub enum MessageType {
    Hello = 1,
    Task = 2,
    Result = 3,
    Error = 4,
    Shutdown = 5,
    TaskExact = 6,
    ResultExact = 7,
}

impl TryFrom<u16> for MessageType {
    type Error = Error;

    fn try_from(v: u16) -> Result<Self> {
        Ok(match v {
            1 => MessageType::Hello,
            2 => MessageType::Task,
            3 => MessageType::Result,
            4 => MessageType::Error,
            5 => MessageType::Shutdown,
            6 => MessageType::TaskExact,
            7 => MessageType::ResultExact,
            other => return Err(Error::UnknownType(other)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub msg_type: MessageType,
    pub payload: Vec<u8>,
}

impl WireMessage {
    pub fn new(msg_type: MessageType, payload: Vec<u8>) -> Self {
        Self { msg_type, payload }
    }

    pub fn empty(msg_type: MessageType) -> Self {
        Self::new(msg_type, Vec::new())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub msg_type: MessageType,
    pub payload_len: u32,
}

impl FrameHeader {
    /// Validates the fixed 12-byte frame header.
    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::TruncatedFrame {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        if bytes[..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::BadVersion(version));
        }
        let msg_type = MessageType::try_from(u16::from_le_bytes([bytes[6], bytes[7]]))?;
        let payload_len = u32::from_le_bytes([bytes[8], bytes[9], bytes[10], bytes[11]]);
        if payload_len > MAX_PAYLOAD {
            return Err(Error::PayloadTooLarge(payload_len));
        }
        Ok(FrameHeader {
            msg_type,
            payload_len,
        })
    }

    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4..6].copy_from_slice(&VERSION.to_le_bytes());
        out[6..8].copy_from_slice(&(self.msg_type as u16).to_le_bytes());
        out[8..].copy_from_slice(&self.payload_len.to_le_bytes());
        out
    }
}

/// Panics if the payload exceeds [`MAX_PAYLOAD`].
pub fn encode_message(msg: &WireMessage) -> Vec<u8> {
    let payload_len = u32::try_from(msg.payload.len())
        .ok()
        .filter(|&n| n <= MAX_PAYLOAD)
        .expect("payload exceeds the frame cap");
    let header = FrameHeader {
        msg_type: msg.msg_type,
        payload_len,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + msg.payload.len());
    out.extend_from_slice(&header.encode());
    out.extend_from_slice(&msg.payload);
    out
}

/// Decodes the frame at the start of `bytes`, returning it with the number
/// of bytes consumed.
pub fn decode_message(bytes: &[u8]) -> Result<(WireMessage, usize)> {
    let header = FrameHeader::decode(bytes)?;
    let total = HEADER_LEN + header.payload_len as usize;
    if bytes.len() < total {
        return Err(Error::TruncatedFrame {
            expected: total,
            found: bytes.len(),
        });
    }
    let msg = WireMessage::new(header.msg_type, bytes[HEADER_LEN..total].to_vec());
    Ok((msg, total))
}

/// Sample representation inside TASK/RESULT payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleEncoding {
    /// Quantized 8 bits per sample.
    Byte,
    /// Raw `f32`, little-endian.
    Float32,
}

impl SampleEncoding {
    pub fn bytes_per_sample(self) -> usize {
        match self {
            SampleEncoding::Byte => 1,
            SampleEncoding::Float32 => 4,
        }
    }

    pub fn task_type(self) -> MessageType {
        match self {
            SampleEncoding::Byte => MessageType::Task,
            SampleEncoding::Float32 => MessageType::TaskExact,
        }
    }

    pub fn result_type(self) -> MessageType {
        match self {
            SampleEncoding::Byte => MessageType::Result,
            SampleEncoding::Float32 => MessageType::ResultExact,
        }
    }

    fn put_plane(self, out: &mut Vec<u8>, plane: &Plane) {
        match self {
            SampleEncoding::Byte => out.extend(plane.samples().iter().map(|&v| quantize_sample(v))),
            SampleEncoding::Float32 => {
                for v in plane.samples() {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }

    fn take_plane(self, r: &mut Reader<'_>, width: usize, height: usize) -> Result<Plane> {
        let bytes = r.take(width * height * self.bytes_per_sample())?;
        let samples = match self {
            SampleEncoding::Byte => bytes.iter().map(|&b| f32::from(b)).collect(),
            SampleEncoding::Float32 => bytes
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect(),
        };
        Plane::new(width, height, samples).map_err(|_| Error::MalformedPayload("invalid samples"))
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(Error::MalformedPayload("payload shorter than declared"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn finish(&self) -> Result<()> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(Error::MalformedPayload("payload longer than declared"))
        }
    }
}

fn put_tile(out: &mut Vec<u8>, tile: TileIndex) -> Result<()> {
    let row = u16::try_from(tile.row).ok().filter(|&v| v != NO_TILE);
    let col = u16::try_from(tile.col).ok().filter(|&v| v != NO_TILE);
    match (row, col) {
        (Some(r), Some(c)) => {
            out.extend_from_slice(&r.to_le_bytes());
            out.extend_from_slice(&c.to_le_bytes());
            Ok(())
        }
        _ => Err(Error::MalformedPayload("tile index does not fit in 16 bits")),
    }
}

fn take_tile(r: &mut Reader<'_>) -> Result<TileIndex> {
    Ok(TileIndex {
        row: usize::from(r.u16()?),
        col: usize::from(r.u16()?),
    })
}

/// `(method, wavelet, wa_weight_milli)` codes of a fusion method.
pub fn method_codes(method: &FusionMethod) -> (u8, u8, u16) {
    match *method {
        FusionMethod::WeightedAverage { weight } => {
            (0, 0, libm::roundf(weight.clamp(0.0, 1.0) * 1000.0) as u16)
        }
        FusionMethod::Ihs => (1, 0, 0),
        FusionMethod::DwtReplace(WaveletKind::Haar) => (2, 0, 0),
        FusionMethod::DwtReplace(WaveletKind::Daubechies4) => (2, 1, 0),
    }
}

pub fn method_from_codes(method: u8, wavelet: u8, weight_milli: u16) -> Result<FusionMethod> {
    Ok(match (method, wavelet) {
        (0, _) if weight_milli <= 1000 => FusionMethod::WeightedAverage {
            weight: f32::from(weight_milli) / 1000.0,
        },
        (0, _) => return Err(Error::MalformedPayload("weight above 1000 milli")),
        (1, _) => FusionMethod::Ihs,
        (2, 0) => FusionMethod::DwtReplace(WaveletKind::Haar),
        (2, 1) => FusionMethod::DwtReplace(WaveletKind::Daubechies4),
        (2, _) => return Err(Error::MalformedPayload("unknown wavelet code")),
        _ => return Err(Error::MalformedPayload("unknown method code")),
    })
}

/// The method a worker reconstructs from the wire codes. Differs from
/// `method` only in the weight, which travels in thousandths.
pub fn wire_method(method: &FusionMethod) -> FusionMethod {
    let (m, w, milli) = method_codes(method);
    method_from_codes(m, w, milli).expect("codes produced by method_codes")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskPayload {
    pub tile: TileIndex,
    pub method: FusionMethod,
    pub pan: Plane,
    pub ms: MultibandImage,
}

impl TaskPayload {
    pub fn encode(&self, enc: SampleEncoding) -> Result<Vec<u8>> {
        let (w, h) = self.pan.dims();
        if w % 2 != 0 || h % 2 != 0 {
            return Err(Error::OddDimension { width: w, height: h });
        }
        if self.ms.dims() != self.method.working_size(w, h) {
            return Err(Error::DimensionMismatch("MS planes do not match the method's working size"));
        }
        let bands = u8::try_from(self.ms.band_count())
            .map_err(|_| Error::MalformedPayload("more than 255 bands"))?;
        let (pw, ph) = match (u32::try_from(w), u32::try_from(h)) {
            (Ok(pw), Ok(ph)) => (pw, ph),
            _ => return Err(Error::MalformedPayload("tile dimension exceeds 32 bits")),
        };
        let (m, wl, milli) = method_codes(&self.method);
        let samples = (w * h + self.ms.width() * self.ms.height() * self.ms.band_count())
            * enc.bytes_per_sample();
        let mut out = Vec::with_capacity(17 + samples);
        put_tile(&mut out, self.tile)?;
        out.push(m);
        out.push(wl);
        out.extend_from_slice(&milli.to_le_bytes());
        out.extend_from_slice(&pw.to_le_bytes());
        out.extend_from_slice(&ph.to_le_bytes());
        out.push(bands);
        enc.put_plane(&mut out, &self.pan);
        for band in self.ms.bands() {
            enc.put_plane(&mut out, band);
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8], enc: SampleEncoding) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let tile = take_tile(&mut r)?;
        let (m, wl, milli) = (r.u8()?, r.u8()?, r.u16()?);
        let method = method_from_codes(m, wl, milli)?;
        let w = r.u32()? as usize;
        let h = r.u32()? as usize;
        let band_count = usize::from(r.u8()?);
        if w == 0 || h == 0 || band_count == 0 {
            return Err(Error::MalformedPayload("empty tile"));
        }
        if w % 2 != 0 || h % 2 != 0 {
            return Err(Error::OddDimension { width: w, height: h });
        }
        let (mw, mh) = method.working_size(w, h);
        let expected = (w as u64 * h as u64 + mw as u64 * mh as u64 * band_count as u64)
            * enc.bytes_per_sample() as u64;
        if expected != (bytes.len() - r.pos) as u64 {
            return Err(Error::MalformedPayload("sample bytes do not match declared dimensions"));
        }
        let pan = enc.take_plane(&mut r, w, h)?;
        let bands = (0..band_count)
            .map(|_| enc.take_plane(&mut r, mw, mh))
            .collect::<Result<Vec<_>>>()?;
        r.finish()?;
        Ok(TaskPayload {
            tile,
            method,
            pan,
            ms: MultibandImage::new(bands)?,
        })
    }

    /// Tile index from the first four payload bytes, if present.
    pub fn peek_tile(bytes: &[u8]) -> Option<TileIndex> {
        take_tile(&mut Reader::new(bytes)).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultPayload {
    pub tile: TileIndex,
    pub bands: MultibandImage,
}

impl ResultPayload {
    pub fn encode(&self, enc: SampleEncoding) -> Result<Vec<u8>> {
        let count = u8::try_from(self.bands.band_count())
            .map_err(|_| Error::MalformedPayload("more than 255 bands"))?;
        let (w, h) = self.bands.dims();
        let mut out = Vec::with_capacity(5 + w * h * usize::from(count) * enc.bytes_per_sample());
        put_tile(&mut out, self.tile)?;
        out.push(count);
        for band in self.bands.bands() {
            enc.put_plane(&mut out, band);
        }
        Ok(out)
    }

    /// Plane size is not on the wire; the receiver supplies the tile size it
    /// expects.
    pub fn decode(bytes: &[u8], enc: SampleEncoding, width: usize, height: usize) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let tile = take_tile(&mut r)?;
        let count = usize::from(r.u8()?);
        if count == 0 {
            return Err(Error::MalformedPayload("no bands"));
        }
        if (bytes.len() - r.pos) as u64 != (width * height * count * enc.bytes_per_sample()) as u64 {
            return Err(Error::MalformedPayload("sample bytes do not match the tile size"));
        }
        let bands = (0..count)
            .map(|_| enc.take_plane(&mut r, width, height))
            .collect::<Result<Vec<_>>>()?;
        r.finish()?;
        Ok(ResultPayload {
            tile,
            bands: MultibandImage::new(bands)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorPayload {
    pub tile: Option<TileIndex>,
    pub reason: String,
}

impl ErrorPayload {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.reason.len());
        let tile = self.tile.filter(|t| put_tile(&mut Vec::new(), *t).is_ok());
        match tile {
            Some(t) => put_tile(&mut out, t).expect("checked"),
            None => {
                out.extend_from_slice(&NO_TILE.to_le_bytes());
                out.extend_from_slice(&NO_TILE.to_le_bytes());
            }
        }
        out.extend_from_slice(self.reason.as_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let (row, col) = (r.u16()?, r.u16()?);
        let tile = (row != NO_TILE || col != NO_TILE).then(|| TileIndex {
            row: usize::from(row),
            col: usize::from(col),
        });
        let reason = core::str::from_utf8(&bytes[4..])
            .map_err(|_| Error::MalformedPayload("reason is not UTF-8"))?;
        Ok(ErrorPayload {
            tile,
            reason: String::from(reason),
        })
    }
}

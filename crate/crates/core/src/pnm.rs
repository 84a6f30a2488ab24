//! Binary PGM (`P5`) and PPM (`P6`) with maxval 255.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::image::Raster8;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.bytes.len() {
                Error::MalformedHeader("header ends early")
            } else {
                Error::MalformedHeader("expected a decimal number")
            });
        }
        let mut value: usize = 0;
        for &d in &self.bytes[start..self.pos] {
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add(usize::from(d - b'0')))
                .ok_or(Error::MalformedHeader("number overflows"))?;
        }
        Ok(value)
    }
}

/// Parses a binary PGM or PPM image.
pub fn read_pnm(bytes: &[u8]) -> Result<Raster8> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        Some(_) => return Err(Error::UnsupportedFormat("magic is not P5 or P6")),
        None => return Err(Error::MalformedHeader("missing magic")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    if !cur.bytes.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(Error::UnsupportedFormat("magic is not P5 or P6"));
    }
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval = cur.number()?;
    if width == 0 || height == 0 {
        return Err(Error::MalformedHeader("zero dimension"));
    }
    if maxval != 255 {
        return Err(Error::UnsupportedFormat("maxval must be 255"));
    }
    // exactly one whitespace byte separates maxval from the payload
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(Error::MalformedHeader("missing whitespace after maxval")),
    }
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or(Error::MalformedHeader("dimensions overflow"))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }
    Raster8::new(width, height, channels, payload[..expected].to_vec())
}

/// Serializes a raster as `P5` (one channel) or `P6` (three channels).
pub fn write_pnm(raster: &Raster8) -> Vec<u8> {
    let magic = if raster.channels() == 1 { "P5" } else { "P6" };
    let header = format!("{magic}\n{} {}\n255\n", raster.width(), raster.height());
    let mut out = Vec::with_capacity(header.len() + raster.samples().len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(raster.samples());
    out
}

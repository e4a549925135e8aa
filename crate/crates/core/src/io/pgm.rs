//! Binary PGM (P5) with maxval 255.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::plane::PlaneU8;

pub fn encode_pgm(plane: &PlaneU8) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", plane.width(), plane.height()).into_bytes();
    out.extend_from_slice(plane.samples());
    out
}

struct Header<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Pgm(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("{what} out of range")))
    }
}

pub fn decode_pgm(data: &[u8]) -> Result<PlaneU8> {
    if data.len() < 2 || &data[..2] != b"P5" {
        return Err(Error::Pgm("missing P5 magic".into()));
    }
    let mut h = Header { data, pos: 2 };
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if maxval != 255 {
        return Err(Error::Pgm(format!("maxval {maxval} unsupported (only 255)")));
    }
    // exactly one whitespace byte separates the header from the raster
    match data.get(h.pos) {
        Some(c) if c.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(Error::Pgm("no whitespace after maxval".into())),
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("dimensions overflow".into()))?;
    let raster = &data[h.pos..];
    if raster.len() < n {
        return Err(Error::Pgm(format!("raster has {} of {n} bytes", raster.len())));
    }
    if raster.len() > n {
        return Err(Error::Pgm(format!("{} trailing bytes after raster", raster.len() - n)));
    }
    PlaneU8::new(width, height, raster.to_vec()).map_err(|e| Error::Pgm(e.to_string()))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<PlaneU8> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, plane: &PlaneU8) -> Result<()> {
    fs::write(path, encode_pgm(plane))?;
    Ok(())
}

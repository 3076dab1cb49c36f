//! Binary PGM (P5) with maxval 255.

use std::fs;
use std::io::Write;
use std::path::Path;

use arsc_core::pipeline::GrayImage;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("byte {offset}: {reason}")]
    Malformed { offset: usize, reason: String },
    #[error("unsupported maxval {0} (only 255)")]
    UnsupportedMaxval(u32),
    #[error("byte {offset}: pixel data truncated, expected {expected} bytes, found {found}")]
    Truncated {
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn malformed(offset: usize, reason: impl Into<String>) -> PgmError {
    PgmError::Malformed {
        offset,
        reason: reason.into(),
    }
}

struct Header<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while let Some(&c) = self.buf.get(self.pos) {
            if c == b'#' {
                while self.buf.get(self.pos).is_some_and(|&c| c != b'\n') {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, PgmError> {
        self.skip_space();
        let start = self.pos;
        while self.buf.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.buf.get(self.pos) {
                None => malformed(self.pos, format!("unexpected end of header, expected {what}")),
                Some(_) => malformed(self.pos, format!("expected {what}")),
            });
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| malformed(start, format!("{what} out of range")))
    }
}

pub fn decode(buf: &[u8]) -> Result<GrayImage, PgmError> {
    if buf.len() < 2 {
        return Err(malformed(buf.len(), "unexpected end of header, expected magic P5"));
    }
    if &buf[..2] != b"P5" {
        return Err(malformed(0, "bad magic, expected P5"));
    }
    let mut h = Header { buf, pos: 2 };
    if !h.buf.get(2).is_some_and(|c| c.is_ascii_whitespace() || *c == b'#') {
        return Err(malformed(2, "expected whitespace after magic"));
    }
    let width = h.number("width")?;
    let height = h.number("height")?;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(malformed(h.pos, "zero image dimension"));
    }
    if maxval != 255 {
        return Err(PgmError::UnsupportedMaxval(maxval));
    }
    match buf.get(h.pos) {
        Some(c) if c.is_ascii_whitespace() => h.pos += 1,
        Some(_) => return Err(malformed(h.pos, "expected single whitespace before pixel data")),
        None => return Err(malformed(h.pos, "unexpected end of header")),
    }
    let expected = width as usize * height as usize;
    let data = &buf[h.pos..];
    if data.len() < expected {
        return Err(PgmError::Truncated {
            offset: buf.len(),
            expected,
            found: data.len(),
        });
    }
    GrayImage::new(width as usize, height as usize, data[..expected].to_vec())
        .map_err(|e| malformed(h.pos, e.to_string()))
}

pub fn encode(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn read(path: &Path) -> Result<GrayImage, PgmError> {
    decode(&fs::read(path)?)
}

pub fn write(path: &Path, img: &GrayImage) -> Result<(), PgmError> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode(img))?;
    Ok(())
}

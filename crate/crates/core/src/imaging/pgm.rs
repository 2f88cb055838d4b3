//! Binary PGM (P5) frames. Luminance `v` maps to the byte `round(255·v)`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::GrayImage;

pub fn write_pgm<W: Write>(w: &mut W, img: &GrayImage) -> Result<()> {
    write!(w, "P5\n{} {}\n255\n", img.width(), img.height())?;
    let bytes: Vec<u8> = img.data().iter().map(|&v| (v * 255.0).round() as u8).collect();
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_pgm<R: Read>(r: &mut R) -> Result<GrayImage> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode(&bytes)
}

pub fn save_pgm(path: &Path, img: &GrayImage) -> Result<()> {
    let mut buf = Vec::with_capacity(img.data().len() + 32);
    write_pgm(&mut buf, img)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    decode(&fs::read(path)?)
}

fn decode(bytes: &[u8]) -> Result<GrayImage> {
    let fail = |offset: usize, message: &str| Error::Format {
        offset: offset as u64,
        message: message.to_owned(),
    };
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(fail(0, "not a binary PGM (missing P5 magic)"));
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in &mut fields {
        // Whitespace and '#' comments may separate header fields.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(fail(pos, "expected a header number"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fail(start, "header number out of range"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(fail(pos, "expected whitespace after maxval"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(fail(pos, "only 8-bit PGM (maxval 1..=255) is supported"));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| fail(pos, "image dimensions overflow"))?;
    if bytes.len() - pos < n {
        return Err(fail(bytes.len(), "truncated pixel data"));
    }
    let scale = maxval as f64;
    let data = bytes[pos..pos + n]
        .iter()
        .map(|&b| (b as f64 / scale).min(1.0))
        .collect();
    GrayImage::new(width, height, data)
}

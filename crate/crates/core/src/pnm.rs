//! Binary PGM (`P5`, 16-bit big-endian) and grayscale PFM (`Pf`) codecs.
//!
//! PFM stores rows bottom-to-top; [`read_pfm`] and [`write_pfm`] convert to
//! and from the top-to-bottom order used by [`Raster`].

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::Raster;

/// 16-bit grayscale image as stored in a `P5` file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gray16 {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u16>,
}

pub fn encode_pgm16(img: &Gray16) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n65535\n", img.width, img.height).into_bytes();
    out.reserve(img.pixels.len() * 2);
    for &p in &img.pixels {
        out.extend_from_slice(&p.to_be_bytes());
    }
    out
}

pub fn decode_pgm(bytes: &[u8], context: &str) -> Result<Gray16> {
    let mut cur = HeaderCursor::new(bytes, context);
    let magic = cur.token()?;
    if magic != "P5" {
        return Err(Error::format(context, format!("expected P5 magic, found {magic:?}")));
    }
    let width = cur.number()?;
    let height = cur.number()?;
    let maxval = cur.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(context, format!("bad maxval {maxval}")));
    }
    let body = cur.body()?;
    let n = width * height;
    let pixels = if maxval < 256 {
        if body.len() < n {
            return Err(Error::format(context, "truncated 8-bit pixel data"));
        }
        body[..n].iter().map(|&b| b as u16).collect()
    } else {
        if body.len() < 2 * n {
            return Err(Error::format(context, "truncated 16-bit pixel data"));
        }
        body[..2 * n]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    Ok(Gray16 {
        width,
        height,
        pixels,
    })
}

pub fn write_pgm16(path: &Path, img: &Gray16) -> Result<()> {
    fs::write(path, encode_pgm16(img)).map_err(|e| Error::io(path, e))
}

pub fn read_pgm(path: &Path) -> Result<Gray16> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pgm(&bytes, &path.display().to_string())
}

/// Encode as little-endian `Pf` with scale -1.0. Samples are narrowed to f32.
pub fn encode_pfm(r: &Raster) -> Vec<u8> {
    let mut out = format!("Pf\n{} {}\n-1.0\n", r.width(), r.height()).into_bytes();
    out.reserve(r.len() * 4);
    for y in (0..r.height()).rev() {
        for x in 0..r.width() {
            out.extend_from_slice(&(r.get(x, y) as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8], context: &str) -> Result<Raster> {
    let mut cur = HeaderCursor::new(bytes, context);
    let magic = cur.token()?;
    if magic != "Pf" {
        return Err(Error::format(
            context,
            format!("expected grayscale Pf magic, found {magic:?}"),
        ));
    }
    let width = cur.number()?;
    let height = cur.number()?;
    let scale: f64 = cur
        .token()?
        .parse()
        .map_err(|_| Error::format(context, "unparsable PFM scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format(context, "PFM scale must be finite and nonzero"));
    }
    let little = scale < 0.0;
    let body = cur.body()?;
    if body.len() < 4 * width * height {
        return Err(Error::format(context, "truncated PFM data"));
    }
    let mut out = Raster::zeros(width, height);
    let mut chunks = body.chunks_exact(4);
    for y in (0..height).rev() {
        for x in 0..width {
            let c = chunks.next().expect("length checked above");
            let b = [c[0], c[1], c[2], c[3]];
            let v = if little {
                f32::from_le_bytes(b)
            } else {
                f32::from_be_bytes(b)
            };
            out.set(x, y, v as f64);
        }
    }
    Ok(out)
}

pub fn write_pfm(path: &Path, r: &Raster) -> Result<()> {
    fs::write(path, encode_pfm(r)).map_err(|e| Error::io(path, e))
}

pub fn read_pfm(path: &Path) -> Result<Raster> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes, &path.display().to_string())
}

/// Whitespace/comment aware header reader shared by both formats. The
/// header ends with exactly one whitespace byte after the last field.
struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    context: &'a str,
}

impl<'a> HeaderCursor<'a> {
    fn new(bytes: &'a [u8], context: &'a str) -> Self {
        Self {
            bytes,
            pos: 0,
            context,
        }
    }

    fn skip_space_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Result<String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(self.context, "unexpected end of header"));
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<usize> {
        let t = self.token()?;
        t.parse()
            .map_err(|_| Error::format(self.context, format!("bad header number {t:?}")))
    }

    fn body(self) -> Result<&'a [u8]> {
        if self.pos >= self.bytes.len() {
            return Err(Error::format(self.context, "missing pixel data"));
        }
        Ok(&self.bytes[self.pos + 1..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_is_bit_exact() {
        let img = Gray16 {
            width: 2,
            height: 1,
            pixels: vec![1, 0xABCD],
        };
        let bytes = encode_pgm16(&img);
        assert_eq!(&bytes[..], b"P5\n2 1\n65535\n\x00\x01\xAB\xCD");
        assert_eq!(decode_pgm(&bytes, "t").unwrap(), img);
    }

    #[test]
    fn pfm_is_bottom_up_little_endian() {
        let r = Raster::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        let bytes = encode_pfm(&r);
        let header = b"Pf\n1 2\n-1.0\n";
        assert_eq!(&bytes[..header.len()], header);
        // bottom row (2.0) comes first
        assert_eq!(&bytes[header.len()..header.len() + 4], &2.0f32.to_le_bytes());
        assert_eq!(decode_pfm(&bytes, "t").unwrap(), r);
    }

    #[test]
    fn rejects_color_pfm_and_truncation() {
        assert!(decode_pfm(b"PF\n1 1\n-1.0\n\0\0\0\0", "t").is_err());
        assert!(decode_pgm(b"P5\n2 2\n65535\n\0\0", "t").is_err());
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let bytes = b"P5\n# made by hand\n1 1\n255\n\x07";
        let img = decode_pgm(bytes, "t").unwrap();
        assert_eq!(img.pixels, vec![7]);
    }
}

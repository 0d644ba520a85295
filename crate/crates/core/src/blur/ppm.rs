//! Binary PPM (P6, maxval 255) reading and writing.

use std::path::Path;

use super::{BlurError, Image};

fn format_err(offset: usize, message: impl Into<String>) -> BlurError {
    BlurError::Format {
        offset,
        message: message.into(),
    }
}

struct HeaderReader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.data.len() {
            match self.data[self.pos] {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, BlurError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(if self.pos >= self.data.len() {
                format_err(start, format!("header truncated before {what}"))
            } else {
                format_err(start, format!("expected {what}"))
            });
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format_err(start, format!("{what} out of range")))
    }
}

/// Decodes a P6 byte stream into a 3-channel float image with 0..255 values.
pub fn decode_ppm(data: &[u8]) -> Result<Image, BlurError> {
    if data.len() < 2 {
        return Err(format_err(0, "file too short for a magic number"));
    }
    match &data[..2] {
        b"P6" => {}
        b"P5" => return Err(format_err(0, "grayscale PGM (P5) is not supported")),
        _ => return Err(format_err(0, "not a binary PPM (expected magic P6)")),
    }
    let mut r = HeaderReader { data, pos: 2 };
    let w = r.number("width")?;
    let h = r.number("height")?;
    let maxval_at = {
        r.skip_space_and_comments();
        r.pos
    };
    let maxval = r.number("maxval")?;
    if w == 0 || h == 0 {
        return Err(format_err(2, format!("zero image dimension {w}x{h}")));
    }
    if maxval != 255 {
        return Err(format_err(maxval_at, format!("unsupported maxval {maxval} (only 255)")));
    }
    match data.get(r.pos) {
        Some(b) if b.is_ascii_whitespace() => {}
        _ => return Err(format_err(r.pos, "missing whitespace after maxval")),
    }
    let start = r.pos + 1;
    let need = w
        .checked_mul(h)
        .and_then(|p| p.checked_mul(3))
        .ok_or_else(|| format_err(2, "image dimensions overflow"))?;
    let have = data.len() - start;
    if have < need {
        return Err(format_err(
            data.len(),
            format!("payload truncated: expected {need} bytes, found {have}"),
        ));
    }
    let pixels = data[start..start + need].iter().map(|&b| b as f32).collect();
    Image::new(w, h, 3, pixels)
}

/// Encodes a 3-channel image, rounding to nearest and clamping to 0..255.
pub fn encode_ppm(img: &Image) -> Result<Vec<u8>, BlurError> {
    if img.channels() != 3 {
        return Err(BlurError::Parameter(format!(
            "PPM output needs 3 channels, image has {}",
            img.channels()
        )));
    }
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.data().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    Ok(out)
}

pub fn load_ppm(path: &Path) -> Result<Image, BlurError> {
    let data = std::fs::read(path).map_err(|source| BlurError::Io {
        path: path.display().to_string(),
        source,
    })?;
    decode_ppm(&data)
}

pub fn save_ppm(img: &Image, path: &Path) -> Result<(), BlurError> {
    let bytes = encode_ppm(img)?;
    std::fs::write(path, bytes).map_err(|source| BlurError::Io {
        path: path.display().to_string(),
        source,
    })
}

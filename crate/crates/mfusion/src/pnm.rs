//! Netpbm grayscale and color input, 8-bit PGM output.
//!
//! Reads P2/P5 (gray) and P3/P6 (color, reduced to Rec.601 luma) with
//! `maxval <= 255`. Writes P5 with `maxval = 255`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mfusion_core::Image;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PnmError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("format error at byte {offset}: {message}")]
    Format { offset: usize, message: String },
}

fn format_err(offset: usize, message: impl Into<String>) -> PnmError {
    PnmError::Format { offset, message: message.into() }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    GrayAscii,
    ColorAscii,
    GrayBinary,
    ColorBinary,
}

impl Kind {
    fn channels(self) -> usize {
        match self {
            Kind::GrayAscii | Kind::GrayBinary => 1,
            Kind::ColorAscii | Kind::ColorBinary => 3,
        }
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn skip_space(&mut self, comments: bool) {
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if comments && b == b'#' {
                while self.data.get(self.pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Next decimal token. Returns its start offset and value.
    fn number(&mut self, what: &str, comments: bool) -> Result<(usize, u64), PnmError> {
        self.skip_space(comments);
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.data.get(start) {
                None => format_err(start, format!("unexpected end of data reading {what}")),
                Some(&b) => format_err(start, format!("expected {what}, found byte 0x{b:02x}")),
            });
        }
        let digits = std::str::from_utf8(&self.data[start..self.pos]).expect("ascii digits");
        let value = digits.parse().map_err(|_| format_err(start, format!("{what} '{digits}' is too large")))?;
        Ok((start, value))
    }
}

/// Decodes a PGM or PPM byte stream into a grayscale image.
///
/// Samples are widened to `f64`; when `maxval < 255` they are rescaled to `[0, 255]`.
pub fn decode(data: &[u8]) -> Result<Image, PnmError> {
    let kind = match data.get(..2) {
        Some(b"P2") => Kind::GrayAscii,
        Some(b"P3") => Kind::ColorAscii,
        Some(b"P5") => Kind::GrayBinary,
        Some(b"P6") => Kind::ColorBinary,
        _ => return Err(format_err(0, "unsupported magic number (expected P2, P3, P5 or P6)")),
    };
    let mut rd = Reader { data, pos: 2 };
    if !rd.data.get(2).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(format_err(2, "missing whitespace after magic number"));
    }
    let (w_off, width) = rd.number("width", true)?;
    let (h_off, height) = rd.number("height", true)?;
    let (m_off, maxval) = rd.number("maxval", true)?;
    if width == 0 {
        return Err(format_err(w_off, "width must be positive"));
    }
    if height == 0 {
        return Err(format_err(h_off, "height must be positive"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(format_err(m_off, format!("maxval {maxval} not in 1..=255")));
    }
    let channels = kind.channels() as u64;
    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .filter(|&n| n <= data.len() as u64 * 2)
        .ok_or_else(|| format_err(w_off, format!("{width}x{height} raster cannot fit in {} bytes", data.len())))?
        as usize;

    let raw: Vec<u8> = match kind {
        Kind::GrayBinary | Kind::ColorBinary => {
            match rd.data.get(rd.pos) {
                Some(b) if b.is_ascii_whitespace() => rd.pos += 1,
                Some(_) => return Err(format_err(rd.pos, "expected a single whitespace byte after maxval")),
                None => return Err(format_err(rd.pos, format!("truncated payload: expected {count} bytes, found 0"))),
            }
            let payload = &data[rd.pos..];
            if payload.len() < count {
                return Err(format_err(
                    data.len(),
                    format!("truncated payload: expected {count} bytes, found {}", payload.len()),
                ));
            }
            if let Some(i) = payload[..count].iter().position(|&v| u64::from(v) > maxval) {
                return Err(format_err(rd.pos + i, format!("sample {} exceeds maxval {maxval}", payload[i])));
            }
            payload[..count].to_vec()
        }
        Kind::GrayAscii | Kind::ColorAscii => {
            let mut raw = Vec::with_capacity(count);
            for _ in 0..count {
                let (off, v) = rd.number("sample", false).map_err(|e| match e {
                    PnmError::Format { offset, message } if offset >= data.len() => {
                        format_err(offset, format!("truncated payload: {message}"))
                    }
                    other => other,
                })?;
                if v > maxval {
                    return Err(format_err(off, format!("sample {v} exceeds maxval {maxval}")));
                }
                raw.push(v as u8);
            }
            raw
        }
    };

    let scale = 255.0 / maxval as f64;
    let widen = |v: u8| if maxval == 255 { f64::from(v) } else { f64::from(v) * scale };
    let samples: Vec<f64> = match kind.channels() {
        1 => raw.iter().map(|&v| widen(v)).collect(),
        _ => raw.chunks_exact(3).map(|px| 0.299 * widen(px[0]) + 0.587 * widen(px[1]) + 0.114 * widen(px[2])).collect(),
    };
    Image::from_vec(height as usize, width as usize, samples).map_err(|e| format_err(0, e.to_string()))
}

/// Rounds half away from zero, then clamps to `[0, 255]`.
pub fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

/// The image as it would be stored: every sample quantized.
pub fn quantized(img: &Image) -> Image {
    img.map(|v| f64::from(quantize(v)))
}

/// Encodes a binary PGM (P5, maxval 255).
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.as_slice().iter().map(|&v| quantize(v)));
    out
}

pub fn load_pnm(path: &Path) -> Result<Image, PnmError> {
    let data = fs::read(path).map_err(|source| PnmError::Io { path: path.to_owned(), source })?;
    decode(&data)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Saves `img` as P5.
pub fn save_pnm(img: &Image, path: &Path) -> Result<(), PnmError> {
    write_atomic(path, &encode_pgm(img)).map_err(|source| PnmError::Io { path: path.to_owned(), source })
}

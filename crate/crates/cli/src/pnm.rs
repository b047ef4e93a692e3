//! Binary PGM (`P5`) and grayscale PFM (`Pf`) codecs.

use std::fs;
use std::path::Path;

use sfs_core::ScalarField;

use crate::error::CliError;

fn format_error(msg: impl Into<String>) -> CliError {
    CliError::Format(msg.into())
}

/// Splits off whitespace-separated header tokens, skipping `#` comments.
struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Header<'a> {
    fn token(&mut self) -> Result<&'a str, CliError> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.pos < self.bytes.len() && self.bytes[self.pos] == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format_error("truncated header"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| format_error("header is not ASCII"))
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, CliError> {
        let tok = self.token()?;
        tok.parse().map_err(|_| format_error(format!("bad {what}: {tok:?}")))
    }

    /// Consumes the single whitespace byte that ends the header.
    fn payload(self) -> Result<&'a [u8], CliError> {
        if self.pos >= self.bytes.len() || !self.bytes[self.pos].is_ascii_whitespace() {
            return Err(format_error("missing payload"));
        }
        Ok(&self.bytes[self.pos + 1..])
    }
}

/// Encodes integer levels in `0..=255` as a binary PGM.
pub fn encode_pgm(levels: &ScalarField) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", levels.width(), levels.height()).into_bytes();
    out.extend(levels.data().iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
    out
}

/// Decodes a binary PGM with `maxval <= 255` into levels.
pub fn decode_pgm(bytes: &[u8]) -> Result<ScalarField, CliError> {
    let mut h = Header { bytes, pos: 0 };
    if h.token()? != "P5" {
        return Err(format_error("not a binary PGM (expected P5)"));
    }
    let width: usize = h.number("width")?;
    let height: usize = h.number("height")?;
    let maxval: u32 = h.number("maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(format_error(format!("unsupported maxval {maxval}")));
    }
    let payload = h.payload()?;
    let n = width * height;
    if payload.len() < n {
        return Err(format_error(format!("expected {n} pixels, found {}", payload.len())));
    }
    let data = payload[..n].iter().map(|&b| b as f64).collect();
    ScalarField::new(width, height, data).map_err(|e| format_error(e.to_string()))
}

/// Encodes a field as little-endian grayscale PFM, bottom row first.
pub fn encode_pfm(field: &ScalarField) -> Vec<u8> {
    let (w, h) = (field.width(), field.height());
    let mut out = format!("Pf\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(4 * w * h);
    for row in (0..h).rev() {
        for col in 0..w {
            out.extend_from_slice(&(field.get(row, col) as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_pfm(bytes: &[u8]) -> Result<ScalarField, CliError> {
    let mut h = Header { bytes, pos: 0 };
    match h.token()? {
        "Pf" => {}
        "PF" => return Err(format_error("colour PFM is not supported")),
        other => return Err(format_error(format!("not a PFM (magic {other:?})"))),
    }
    let width: usize = h.number("width")?;
    let height: usize = h.number("height")?;
    let scale: f64 = h.number("scale")?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(format_error("PFM scale must be non-zero"));
    }
    let little = scale < 0.0;
    let payload = h.payload()?;
    let n = width * height;
    if payload.len() < 4 * n {
        return Err(format_error(format!("expected {} bytes of samples, found {}", 4 * n, payload.len())));
    }
    let mut data = vec![0.0; n];
    for (i, chunk) in payload[..4 * n].chunks_exact(4).enumerate() {
        let b = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        let (row, col) = (height - 1 - i / width, i % width);
        data[row * width + col] = v as f64;
    }
    ScalarField::new(width, height, data).map_err(|e| format_error(e.to_string()))
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn in_file(path: &Path, e: CliError) -> CliError {
    match e {
        CliError::Format(msg) => CliError::Format(format!("{}: {msg}", path.display())),
        other => other,
    }
}

pub fn read_pgm(path: &Path) -> Result<ScalarField, CliError> {
    decode_pgm(&read(path)?).map_err(|e| in_file(path, e))
}

pub fn write_pgm(path: &Path, levels: &ScalarField) -> Result<(), CliError> {
    write(path, &encode_pgm(levels))
}

pub fn read_pfm(path: &Path) -> Result<ScalarField, CliError> {
    decode_pfm(&read(path)?).map_err(|e| in_file(path, e))
}

pub fn write_pfm(path: &Path, field: &ScalarField) -> Result<(), CliError> {
    write(path, &encode_pfm(field))
}

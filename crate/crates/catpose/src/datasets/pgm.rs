//! 16-bit binary PGM (P5) depth maps. Raw values scale to meters by the
//! camera's `depth_scale`; a raw value of 0 means "no measurement".

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// A depth image in meters. Zero marks missing measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    pub width: u32,
    pub height: u32,
    data: Vec<f64>,
}

impl DepthImage {
    pub fn from_raw(raw: &[u16], width: u32, height: u32, depth_scale: f64) -> Self {
        let data = raw.iter().map(|&r| f64::from(r) * depth_scale).collect();
        Self {
            width,
            height,
            data,
        }
    }

    /// Depth in meters at pixel `(x, y)`; 0.0 when missing or out of bounds.
    pub fn depth_at(&self, x: u32, y: u32) -> f64 {
        if x >= self.width || y >= self.height {
            return 0.0;
        }
        self.data[(y * self.width + x) as usize]
    }

    pub fn pixels(&self) -> &[f64] {
        &self.data
    }
}

/// Reads a P5 PGM and converts raw values to meters with `depth_scale`.
pub fn load_depth(path: &Path, depth_scale: f64) -> Result<DepthImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut cursor = 0usize;

    let mut next_token = |cursor: &mut usize| -> Result<String> {
        // Skip whitespace and `#` comments.
        loop {
            while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
                *cursor += 1;
            }
            if *cursor < bytes.len() && bytes[*cursor] == b'#' {
                while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                    *cursor += 1;
                }
            } else {
                break;
            }
        }
        let start = *cursor;
        while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if start == *cursor {
            return Err(Error::parse(path, 0, "truncated PGM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*cursor]).to_string())
    };

    let magic = next_token(&mut cursor)?;
    if magic != "P5" {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            msg: format!("magic `{magic}` is not P5"),
        });
    }
    let width: u32 = next_token(&mut cursor)?
        .parse()
        .map_err(|_| Error::parse(path, 0, "bad width"))?;
    let height: u32 = next_token(&mut cursor)?
        .parse()
        .map_err(|_| Error::parse(path, 0, "bad height"))?;
    let maxval: u32 = next_token(&mut cursor)?
        .parse()
        .map_err(|_| Error::parse(path, 0, "bad maxval"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedFormat {
            path: path.to_path_buf(),
            msg: format!("maxval {maxval} out of range"),
        });
    }
    // Exactly one whitespace byte separates the header from the raster.
    cursor += 1;

    let count = width as usize * height as usize;
    let mut raw = Vec::with_capacity(count);
    if maxval > 255 {
        // Two bytes per sample, most significant byte first.
        if bytes.len() < cursor + count * 2 {
            return Err(Error::parse(path, 0, "raster shorter than header promises"));
        }
        for i in 0..count {
            let at = cursor + i * 2;
            raw.push(u16::from_be_bytes([bytes[at], bytes[at + 1]]));
        }
    } else {
        if bytes.len() < cursor + count {
            return Err(Error::parse(path, 0, "raster shorter than header promises"));
        }
        for i in 0..count {
            raw.push(u16::from(bytes[cursor + i]));
        }
    }
    if !(depth_scale > 0.0) {
        return Err(Error::Validation {
            instance_id: path.display().to_string(),
            msg: "depth_scale must be positive".to_string(),
        });
    }
    Ok(DepthImage::from_raw(&raw, width, height, depth_scale))
}

/// Writes raw depth values as a 16-bit P5 PGM.
pub fn write_depth(path: &Path, raw: &[u16], width: u32, height: u32) -> Result<()> {
    assert_eq!(raw.len(), width as usize * height as usize);
    let mut out = Vec::with_capacity(raw.len() * 2 + 32);
    write!(out, "P5\n{width} {height}\n65535\n").expect("vec write");
    for &value in raw {
        out.extend_from_slice(&value.to_be_bytes());
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

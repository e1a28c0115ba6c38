//! PLY point sets: ASCII and binary little-endian, element `vertex` with
//! scalar `x`, `y`, `z` properties (any scalar extras are skipped).

use crate::error::{Error, Result};
use crate::sampling::PointSet;
use nalgebra::Vector3;
use std::io::Write;
use std::path::Path;

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Clone, Copy)]
struct Property {
    size: usize,
    kind: ScalarKind,
}

#[derive(Clone, Copy, PartialEq)]
enum ScalarKind {
    F32,
    F64,
    Int,
    Uint,
}

fn property_type(name: &str) -> Option<Property> {
    let (size, kind) = match name {
        "float" | "float32" => (4, ScalarKind::F32),
        "double" | "float64" => (8, ScalarKind::F64),
        "char" | "int8" => (1, ScalarKind::Int),
        "uchar" | "uint8" => (1, ScalarKind::Uint),
        "short" | "int16" => (2, ScalarKind::Int),
        "ushort" | "uint16" => (2, ScalarKind::Uint),
        "int" | "int32" => (4, ScalarKind::Int),
        "uint" | "uint32" => (4, ScalarKind::Uint),
        _ => return None,
    };
    Some(Property { size, kind })
}

pub fn load_pointset(path: &Path) -> Result<PointSet> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;

    // The header is ASCII lines up to and including "end_header".
    let mut offset = 0usize;
    let mut lines: Vec<(usize, String)> = Vec::new();
    loop {
        let end = bytes[offset..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|p| offset + p)
            .ok_or_else(|| Error::parse(path, lines.len() + 1, "unterminated header"))?;
        let line = String::from_utf8_lossy(&bytes[offset..end]).trim_end_matches('\r').to_string();
        offset = end + 1;
        let done = line.trim() == "end_header";
        lines.push((lines.len() + 1, line));
        if done {
            break;
        }
    }

    let mut iter = lines.iter();
    match iter.next() {
        Some((_, magic)) if magic.trim() == "ply" => {}
        _ => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                msg: "missing `ply` magic".to_string(),
            })
        }
    }

    let mut format = None;
    let mut vertex_count: Option<usize> = None;
    let mut properties: Vec<(String, Property)> = Vec::new();
    let mut in_vertex_element = false;
    for (lineno, line) in iter {
        let line = line.trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("comment") | Some("end_header") | None => {}
            Some("format") => {
                format = match (tokens.next(), tokens.next()) {
                    (Some("ascii"), Some("1.0")) => Some(Format::Ascii),
                    (Some("binary_little_endian"), Some("1.0")) => {
                        Some(Format::BinaryLittleEndian)
                    }
                    _ => {
                        return Err(Error::UnsupportedFormat {
                            path: path.to_path_buf(),
                            msg: format!("unsupported format line `{line}`"),
                        })
                    }
                };
            }
            Some("element") => {
                let name = tokens.next().unwrap_or("");
                if name == "vertex" {
                    let count = tokens
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(path, *lineno, "bad vertex count"))?;
                    vertex_count = Some(count);
                    in_vertex_element = true;
                } else {
                    if vertex_count.is_none() {
                        return Err(Error::UnsupportedFormat {
                            path: path.to_path_buf(),
                            msg: format!("element `{name}` precedes vertex element"),
                        });
                    }
                    in_vertex_element = false;
                }
            }
            Some("property") if in_vertex_element => {
                let type_name = tokens.next().unwrap_or("");
                if type_name == "list" {
                    return Err(Error::UnsupportedFormat {
                        path: path.to_path_buf(),
                        msg: "list property in vertex element".to_string(),
                    });
                }
                let prop = property_type(type_name).ok_or_else(|| {
                    Error::parse(path, *lineno, format!("unknown property type `{type_name}`"))
                })?;
                let prop_name = tokens.next().unwrap_or("").to_string();
                properties.push((prop_name, prop));
            }
            Some("property") => {}
            Some(other) => {
                return Err(Error::parse(
                    path,
                    *lineno,
                    format!("unexpected header record `{other}`"),
                ))
            }
        }
    }

    let format = format.ok_or_else(|| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        msg: "missing format line".to_string(),
    })?;
    let vertex_count = vertex_count.ok_or_else(|| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        msg: "missing vertex element".to_string(),
    })?;
    let column = |name: &str| -> Result<usize> {
        properties
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::UnsupportedFormat {
                path: path.to_path_buf(),
                msg: format!("vertex element lacks `{name}` property"),
            })
    };
    let (cx, cy, cz) = (column("x")?, column("y")?, column("z")?);

    let mut points = Vec::with_capacity(vertex_count);
    match format {
        Format::Ascii => {
            let body = String::from_utf8_lossy(&bytes[offset..]);
            let mut rows = body.lines();
            for i in 0..vertex_count {
                let row = rows
                    .next()
                    .ok_or_else(|| Error::parse(path, lines.len() + i + 1, "missing vertex row"))?;
                let fields: Vec<&str> = row.split_whitespace().collect();
                if fields.len() < properties.len() {
                    return Err(Error::parse(
                        path,
                        lines.len() + i + 1,
                        format!("expected {} fields, got {}", properties.len(), fields.len()),
                    ));
                }
                let parse = |col: usize| -> Result<f64> {
                    fields[col].parse().map_err(|_| {
                        Error::parse(
                            path,
                            lines.len() + i + 1,
                            format!("bad number `{}`", fields[col]),
                        )
                    })
                };
                points.push(Vector3::new(parse(cx)?, parse(cy)?, parse(cz)?));
            }
        }
        Format::BinaryLittleEndian => {
            let stride: usize = properties.iter().map(|(_, p)| p.size).sum();
            let need = stride * vertex_count;
            if bytes.len() < offset + need {
                return Err(Error::parse(
                    path,
                    lines.len(),
                    format!("binary body too short: need {need} bytes"),
                ));
            }
            let field_offset = |col: usize| -> usize {
                properties[..col].iter().map(|(_, p)| p.size).sum()
            };
            let (ox, oy, oz) = (field_offset(cx), field_offset(cy), field_offset(cz));
            for i in 0..vertex_count {
                let base = offset + i * stride;
                let read = |o: usize, col: usize| -> f64 {
                    let prop = properties[col].1;
                    let at = base + o;
                    match (prop.kind, prop.size) {
                        (ScalarKind::F32, 4) => f32::from_le_bytes(
                            bytes[at..at + 4].try_into().expect("slice len"),
                        ) as f64,
                        (ScalarKind::F64, 8) => f64::from_le_bytes(
                            bytes[at..at + 8].try_into().expect("slice len"),
                        ),
                        _ => 0.0, // only float coordinates are meaningful
                    }
                };
                points.push(Vector3::new(read(ox, cx), read(oy, cy), read(oz, cz)));
            }
        }
    }
    PointSet::new(points)
}

/// Writes an ASCII PLY with double-precision coordinates (exact round-trip).
pub fn write_pointset(path: &Path, pts: &PointSet) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "ply").expect("vec write");
    writeln!(out, "format ascii 1.0").expect("vec write");
    writeln!(out, "element vertex {}", pts.len()).expect("vec write");
    writeln!(out, "property double x").expect("vec write");
    writeln!(out, "property double y").expect("vec write");
    writeln!(out, "property double z").expect("vec write");
    writeln!(out, "end_header").expect("vec write");
    for p in pts.iter() {
        writeln!(out, "{} {} {}", p.x, p.y, p.z).expect("vec write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

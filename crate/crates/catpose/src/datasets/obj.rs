//! Wavefront OBJ subset: `v` and `f` records, 1-based indices, polygons
//! fan-triangulated. Non-geometry records are skipped.

use crate::error::{Error, Result};
use crate::sampling::TriMesh;
use nalgebra::Vector3;
use std::io::Write;
use std::path::Path;

pub fn load_mesh(path: &Path) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut vertices: Vec<Vector3<f64>> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0f64; 3];
                for c in &mut coords {
                    let token = tokens
                        .next()
                        .ok_or_else(|| Error::parse(path, lineno, "vertex needs 3 coordinates"))?;
                    *c = token.parse().map_err(|_| {
                        Error::parse(path, lineno, format!("bad coordinate `{token}`"))
                    })?;
                    if !c.is_finite() {
                        return Err(Error::parse(path, lineno, "non-finite coordinate"));
                    }
                }
                vertices.push(Vector3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut indices = Vec::new();
                for token in tokens {
                    // "i", "i/t", "i/t/n", "i//n" all start with the vertex index.
                    let head = token.split('/').next().unwrap_or(token);
                    let idx: i64 = head.parse().map_err(|_| {
                        Error::parse(path, lineno, format!("bad face index `{token}`"))
                    })?;
                    if idx < 1 || idx as usize > vertices.len() {
                        return Err(Error::parse(
                            path,
                            lineno,
                            format!("face index {idx} out of range 1..={}", vertices.len()),
                        ));
                    }
                    indices.push(idx as usize - 1);
                }
                if indices.len() < 3 {
                    return Err(Error::parse(path, lineno, "face needs at least 3 indices"));
                }
                for i in 1..indices.len() - 1 {
                    triangles.push([indices[0], indices[i], indices[i + 1]]);
                }
            }
            // vn/vt/o/g/s/usemtl/mtllib and friends carry no geometry we use.
            _ => {}
        }
    }
    TriMesh::new(vertices, triangles)
}

pub fn write_mesh(path: &Path, mesh: &TriMesh) -> Result<()> {
    let mut out = Vec::new();
    for v in &mesh.vertices {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).expect("vec write");
    }
    for t in &mesh.triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).expect("vec write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("catpose_obj_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!("{}.obj", rand::random::<u64>()));
        std::fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn quad_is_fan_split() {
        let path = write_temp("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.triangles, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn slash_indices_and_comments() {
        let path = write_temp("# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1\n");
        let mesh = load_mesh(&path).unwrap();
        assert_eq!(mesh.triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn out_of_range_index_is_positioned_error() {
        let path = write_temp("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 7\n");
        match load_mesh(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let mesh = crate::testutil::unit_cube_mesh();
        let dir = std::env::temp_dir().join(format!("catpose_objrt_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cube.obj");
        write_mesh(&path, &mesh).unwrap();
        let back = load_mesh(&path).unwrap();
        assert_eq!(mesh, back);
    }
}

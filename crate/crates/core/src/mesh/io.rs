//! Plain-text mesh format:
//!
//! ```text
//! vertices N triangles M periodic P [period LX LY]
//! a b          (N lines)
//! i j k        (M lines, zero-based vertex indices)
//! ```
//!
//! `P` is 0 or 1. A periodic mesh is taken to fill `[min a, min a + LX) ×
//! [min b, min b + LY)`; without the optional `period` tokens the periods are
//! read off the bounding box. Coordinates are written with the shortest
//! representation that round-trips.

use std::fmt::Write as _;
use std::path::Path;

use super::{LabelMesh, MeshError, Periodicity};

pub fn write_mesh_string(m: &LabelMesh) -> String {
    let mut s = String::new();
    let per = m.periodicity();
    let _ = write!(s, "vertices {} triangles {} periodic {}", m.vertices().len(), m.triangles().len(), per.is_some() as u8);
    if let Some(p) = per {
        let _ = write!(s, " period {:?} {:?}", p.lx, p.ly);
    }
    s.push('\n');
    for v in m.vertices() {
        let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
    }
    for t in m.triangles() {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    s
}

pub fn read_mesh_str(src: &str) -> Result<LabelMesh, MeshError> {
    let mut lines = src
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: &str| MeshError::Parse { line, msg: msg.to_string() };
    let (hl, header) = lines.next().ok_or_else(|| err(1, "empty mesh file"))?;
    let tok: Vec<&str> = header.split_whitespace().collect();
    let num = |i: usize, key: &str| -> Result<usize, MeshError> {
        if tok.get(i) != Some(&key) {
            return Err(err(hl, &format!("expected `{key}`")));
        }
        tok.get(i + 1).and_then(|x| x.parse().ok()).ok_or_else(|| err(hl, &format!("bad `{key}` count")))
    };
    let (nv, nt, periodic) = (num(0, "vertices")?, num(2, "triangles")?, num(4, "periodic")?);
    if periodic > 1 {
        return Err(err(hl, "periodic flag must be 0 or 1"));
    }
    let period = match tok.get(6) {
        None => None,
        Some(&"period") if tok.len() == 9 => {
            let p = |i: usize| tok[i].parse::<f64>().map_err(|_| err(hl, "bad period"));
            Some((p(7)?, p(8)?))
        }
        _ => return Err(err(hl, "unexpected tokens after header")),
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| err(hl, "missing vertex lines"))?;
        let v: Vec<f64> = l.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| err(ln, "bad vertex"))?;
        if v.len() != 2 {
            return Err(err(ln, "vertex needs two coordinates"));
        }
        vertices.push([v[0], v[1]]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, l) = lines.next().ok_or_else(|| err(hl, "missing triangle lines"))?;
        let v: Vec<usize> =
            l.split_whitespace().map(str::parse).collect::<Result<_, _>>().map_err(|_| err(ln, "bad triangle"))?;
        if v.len() != 3 {
            return Err(err(ln, "triangle needs three indices"));
        }
        triangles.push([v[0], v[1], v[2]]);
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content"));
    }
    let per = if periodic == 1 {
        let lo = [0, 1].map(|d| vertices.iter().map(|v| v[d]).fold(f64::INFINITY, f64::min));
        let hi = [0, 1].map(|d| vertices.iter().map(|v| v[d]).fold(f64::NEG_INFINITY, f64::max));
        let (lx, ly) = period.unwrap_or((hi[0] - lo[0], hi[1] - lo[1]));
        let origin = if period.is_some() { [0.0, 0.0] } else { lo };
        Some(Periodicity { origin, lx, ly })
    } else {
        None
    };
    LabelMesh::new(vertices, triangles, per)
}

pub fn write_mesh(m: &LabelMesh, path: &Path) -> Result<(), MeshError> {
    std::fs::write(path, write_mesh_string(m)).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))
}

pub fn read_mesh(path: &Path) -> Result<LabelMesh, MeshError> {
    let s = std::fs::read_to_string(path).map_err(|e| MeshError::Io(format!("{}: {e}", path.display())))?;
    read_mesh_str(&s)
}

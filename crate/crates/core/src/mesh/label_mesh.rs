use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MeshError;

/// Periods of a doubly periodic rectangle `[a0, a0 + lx) × [b0, b0 + ly)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Periodicity {
    pub origin: [f64; 2],
    pub lx: f64,
    pub ly: f64,
}

impl Periodicity {
    fn wrap(&self, p: [f64; 2]) -> [f64; 2] {
        let w = |x: f64, o: f64, l: f64| {
            let r = (x - o).rem_euclid(l);
            if (l - r).abs() < 1e-9 * l {
                0.0
            } else {
                r
            }
        };
        [w(p[0], self.origin[0], self.lx), w(p[1], self.origin[1], self.ly)]
    }
}

/// An edge of the triangulation.
///
/// `vertices` run counter-clockwise around `left.0`, so `normal` (outward
/// from the left triangle) is the tangent turned clockwise. For interior
/// faces `right` is the neighbour and its local edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub vertices: [usize; 2],
    pub left: (usize, usize),
    pub right: Option<(usize, usize)>,
    pub normal: [f64; 2],
    pub length: f64,
}

impl Face {
    /// Triangle and barycentric coordinates of the point a fraction `s` of the
    /// way from `vertices[0]` to `vertices[1]`, seen from the left or right side.
    pub fn trace_point(&self, right: bool, s: f64) -> Option<(usize, [f64; 3])> {
        let ((k, e), s) = if right { (self.right?, 1.0 - s) } else { (self.left, s) };
        let [i, j] = EDGE_VERTS[e];
        let mut lam = [0.0; 3];
        lam[i] = 1.0 - s;
        lam[j] = s;
        Some((k, lam))
    }
}

/// Conforming triangulation of the label domain.
///
/// Vertices are geometric: on a periodic mesh the seam vertices appear once on
/// each side, and `vertex_dof` identifies the copies.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    periodic: Option<Periodicity>,
    vertex_dof: Vec<usize>,
    n_vertex_dofs: usize,
    faces: Vec<Face>,
    n_interior: usize,
    elem_faces: Vec<[usize; 3]>,
}

/// Local edge `e` of a triangle joins the two vertices other than `e`.
pub const EDGE_VERTS: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

fn area(v: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [p, q, r] = [v[t[0]], v[t[1]], v[t[2]]];
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

impl LabelMesh {
    /// Builds faces and the periodic identification, and checks orientation,
    /// conformity and topology.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        periodic: Option<Periodicity>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Invalid("mesh has no triangles".into()));
        }
        for (k, t) in triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= vertices.len()) {
                return Err(MeshError::Invalid(format!("triangle {k} references a missing vertex")));
            }
        }
        let (lo, hi) = bbox(&vertices);
        let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let q = 1e-9 * scale;
        let key = |p: [f64; 2]| ((p[0] / q).round() as i64, (p[1] / q).round() as i64);
        let wrap = |p: [f64; 2]| match &periodic {
            Some(per) => per.wrap(p),
            None => p,
        };

        let mut vertex_dof = vec![usize::MAX; vertices.len()];
        let mut n_vertex_dofs = 0;
        let mut seen: HashMap<(i64, i64), usize> = HashMap::new();
        for (i, &p) in vertices.iter().enumerate() {
            let d = *seen.entry(key(wrap(p))).or_insert_with(|| {
                n_vertex_dofs += 1;
                n_vertex_dofs - 1
            });
            vertex_dof[i] = d;
        }

        let mut by_key: HashMap<(i64, i64), Vec<(usize, usize)>> = HashMap::new();
        let mut order = Vec::new();
        for (k, t) in triangles.iter().enumerate() {
            for (e, [i, j]) in EDGE_VERTS.iter().enumerate() {
                let (p, r) = (vertices[t[*i]], vertices[t[*j]]);
                let kk = key(wrap([0.5 * (p[0] + r[0]), 0.5 * (p[1] + r[1])]));
                let entry = by_key.entry(kk).or_default();
                if entry.is_empty() {
                    order.push(kk);
                }
                entry.push((k, e));
            }
        }
        let mut interior = Vec::new();
        let mut boundary = Vec::new();
        for kk in order {
            let v = &by_key[&kk];
            match v.as_slice() {
                [l] => boundary.push((*l, None)),
                [l, r] => interior.push((*l, Some(*r))),
                _ => return Err(MeshError::NonConforming(format!("{} triangles share one edge", v.len()))),
            }
        }
        let n_interior = interior.len();
        let mut elem_faces = vec![[usize::MAX; 3]; triangles.len()];
        let mut faces = Vec::with_capacity(interior.len() + boundary.len());
        for (fi, (l, r)) in interior.into_iter().chain(boundary).enumerate() {
            elem_faces[l.0][l.1] = fi;
            if let Some(r) = r {
                elem_faces[r.0][r.1] = fi;
            }
            let t = triangles[l.0];
            let [i, j] = EDGE_VERTS[l.1];
            faces.push(Face { vertices: [t[i], t[j]], left: l, right: r, normal: [0.0; 2], length: 0.0 });
        }
        let mut m = LabelMesh { vertices, triangles, periodic, vertex_dof, n_vertex_dofs, faces, n_interior, elem_faces };
        m.refresh_geometry()?;
        m.check_topology()?;
        Ok(m)
    }

    fn refresh_geometry(&mut self) -> Result<(), MeshError> {
        for (k, t) in self.triangles.iter().enumerate() {
            let a = area(&self.vertices, t);
            if !(a > 0.0) {
                return Err(MeshError::InvertedTriangle { triangle: k, area: a });
            }
        }
        for f in &mut self.faces {
            let (p, r) = (self.vertices[f.vertices[0]], self.vertices[f.vertices[1]]);
            let s = [r[0] - p[0], r[1] - p[1]];
            let len = s[0].hypot(s[1]);
            f.length = len;
            f.normal = [s[1] / len, -s[0] / len];
        }
        Ok(())
    }

    fn check_topology(&self) -> Result<(), MeshError> {
        let chi = self.n_vertex_dofs as i64 - self.faces.len() as i64 + self.triangles.len() as i64;
        let want = if self.periodic.is_some() { 0 } else { 1 };
        if chi != want {
            return Err(MeshError::NonConforming(format!("Euler characteristic {chi}, expected {want}")));
        }
        if self.periodic.is_some() && self.n_interior != self.faces.len() {
            return Err(MeshError::NonConforming("periodic mesh has unmatched boundary faces".into()));
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn periodicity(&self) -> Option<&Periodicity> {
        self.periodic.as_ref()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic.is_some()
    }

    /// Degree-of-freedom index of each geometric vertex.
    pub fn vertex_dof(&self) -> &[usize] {
        &self.vertex_dof
    }

    pub fn n_vertex_dofs(&self) -> usize {
        self.n_vertex_dofs
    }

    /// All faces, interior ones first.
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn interior_faces(&self) -> &[Face] {
        &self.faces[..self.n_interior]
    }

    pub fn boundary_faces(&self) -> &[Face] {
        &self.faces[self.n_interior..]
    }

    /// Global face index of each local edge.
    pub fn elem_faces(&self) -> &[[usize; 3]] {
        &self.elem_faces
    }

    pub fn area(&self, k: usize) -> f64 {
        area(&self.vertices, &self.triangles[k])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|k| self.area(k)).sum()
    }

    /// Geometric vertices that lie on the boundary of a non-periodic mesh.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for f in self.boundary_faces() {
            on[f.vertices[0]] = true;
            on[f.vertices[1]] = true;
        }
        on
    }

    /// Corner coordinates of triangle `k`.
    pub fn corners(&self, k: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[k];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }
}

fn bbox(v: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in v {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

/// `nx × ny` rectangles on `[0, lx] × [0, ly]`, each split along the
/// diagonal from its lower-left to its upper-right corner.
pub fn structured_rect_mesh(lx: f64, ly: f64, nx: usize, ny: usize, periodic: bool) -> Result<LabelMesh, MeshError> {
    if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
        return Err(MeshError::Invalid(format!("domain size {lx} × {ly}")));
    }
    if nx == 0 || ny == 0 {
        return Err(MeshError::Invalid(format!("cell counts {nx} × {ny}")));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v11, v01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let per = periodic.then_some(Periodicity { origin: [0.0, 0.0], lx, ly });
    LabelMesh::new(vertices, triangles, per)
}

/// Jitters every movable vertex by a uniform draw in `[-amplitude, amplitude]²`.
/// On periodic meshes all vertices move and copies move together; otherwise
/// boundary vertices stay put.
pub fn perturb_mesh(m: &LabelMesh, amplitude: f64, seed: u64) -> Result<LabelMesh, MeshError> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(MeshError::Invalid(format!("perturbation amplitude {amplitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shifts: Vec<[f64; 2]> = (0..m.n_vertex_dofs)
        .map(|_| [rng.random_range(-1.0..=1.0) * amplitude, rng.random_range(-1.0..=1.0) * amplitude])
        .collect();
    let fixed = if m.is_periodic() { vec![false; m.vertices.len()] } else { m.boundary_vertices() };
    let mut out = m.clone();
    for (i, p) in out.vertices.iter_mut().enumerate() {
        if !fixed[i] {
            let s = shifts[m.vertex_dof[i]];
            p[0] += s[0];
            p[1] += s[1];
        }
    }
    out.refresh_geometry()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let m = structured_rect_mesh(1.0, 1.0, 1, 1, false).unwrap();
        assert_eq!(m.triangles().len(), 2);
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.interior_faces().len(), 1);
        assert_eq!(m.boundary_faces().len(), 4);
    }

    #[test]
    fn periodic_two_by_two() {
        let m = structured_rect_mesh(1.0, 1.0, 2, 2, true).unwrap();
        assert_eq!(m.triangles().len(), 8);
        assert_eq!(m.n_vertex_dofs(), 4);
        assert_eq!(m.faces().len(), 12);
        assert!(m.boundary_faces().is_empty());
    }

    #[test]
    fn periodic_one_by_one() {
        let m = structured_rect_mesh(2.0, 3.0, 1, 1, true).unwrap();
        assert_eq!(m.n_vertex_dofs(), 1);
        assert_eq!(m.faces().len(), 3);
    }

    #[test]
    fn normals_point_out_of_left() {
        let m = structured_rect_mesh(1.0, 1.0, 3, 2, false).unwrap();
        for f in m.faces() {
            let c = m.corners(f.left.0);
            let cen = [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0];
            let p = m.vertices()[f.vertices[0]];
            assert!((p[0] - cen[0]) * f.normal[0] + (p[1] - cen[1]) * f.normal[1] > 0.0);
        }
    }

    #[test]
    fn bad_sizes() {
        assert!(structured_rect_mesh(0.0, 1.0, 1, 1, false).is_err());
        assert!(structured_rect_mesh(1.0, 1.0, 0, 1, false).is_err());
    }

    #[test]
    fn overlarge_perturbation_is_rejected() {
        let m = structured_rect_mesh(1.0, 1.0, 4, 4, false).unwrap();
        assert!(matches!(perturb_mesh(&m, 0.6, 3), Err(MeshError::InvertedTriangle { .. })));
    }
}

use std::sync::Arc;

use super::{LabelMesh, MeshError, EDGE_VERTS};

/// Strictly increasing time knots `t_0 < t_1 < … < t_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSlabs {
    knots: Vec<f64>,
}

impl TimeSlabs {
    pub fn new(knots: Vec<f64>) -> Result<Self, MeshError> {
        if knots.len() < 2 {
            return Err(MeshError::Knots("need at least two knots".into()));
        }
        if knots.iter().any(|t| !t.is_finite()) || knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(MeshError::Knots("knots must be finite and strictly increasing".into()));
        }
        Ok(TimeSlabs { knots })
    }

    pub fn uniform(t0: f64, horizon: f64, n: usize) -> Result<Self, MeshError> {
        if n == 0 || !(horizon > 0.0) {
            return Err(MeshError::Knots(format!("{n} slabs over horizon {horizon}")));
        }
        Self::new((0..=n).map(|i| t0 + horizon * i as f64 / n as f64).collect())
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn num_slabs(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn slab(&self, n: usize) -> (f64, f64) {
        (self.knots[n], self.knots[n + 1])
    }

    /// Slab containing `t`; a knot belongs to the slab it starts, the final
    /// knot to the last slab.
    pub fn locate(&self, t: f64) -> Result<usize, MeshError> {
        let (t0, tn) = (self.knots[0], self.knots[self.knots.len() - 1]);
        if !(t >= t0 && t <= tn) {
            return Err(MeshError::OutOfSlab { t });
        }
        let n = self.knots.partition_point(|&k| k <= t);
        Ok(n.saturating_sub(1).min(self.num_slabs() - 1))
    }
}

/// Affine geometry of one triangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElementGeometry {
    pub corners: [[f64; 2]; 3],
    pub area: f64,
    /// `∇λ_i` in label coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(corners: [[f64; 2]; 3]) -> Self {
        let [p, q, r] = corners;
        let det = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]);
        let mut g = [[0.0; 2]; 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            g[i] = [(corners[j][1] - corners[k][1]) / det, (corners[k][0] - corners[j][0]) / det];
        }
        ElementGeometry { corners, area: 0.5 * det, grad_lambda: g }
    }

    pub fn point(&self, lam: [f64; 3]) -> [f64; 2] {
        let c = &self.corners;
        [
            lam[0] * c[0][0] + lam[1] * c[1][0] + lam[2] * c[2][0],
            lam[0] * c[0][1] + lam[1] * c[1][1] + lam[2] * c[2][1],
        ]
    }

    /// Barycentric coordinates of a label point.
    pub fn barycentric(&self, p: [f64; 2]) -> [f64; 3] {
        let c0 = self.corners[0];
        let l1 = self.grad_lambda[1][0] * (p[0] - c0[0]) + self.grad_lambda[1][1] * (p[1] - c0[1]);
        let l2 = self.grad_lambda[2][0] * (p[0] - c0[0]) + self.grad_lambda[2][1] * (p[1] - c0[1]);
        [1.0 - l1 - l2, l1, l2]
    }
}

/// Values and label derivatives of the local basis at one point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BasisValues {
    pub val: Vec<f64>,
    pub da: Vec<f64>,
    pub db: Vec<f64>,
    pub daa: Vec<f64>,
    pub dab: Vec<f64>,
    pub dbb: Vec<f64>,
}

/// Local nodes of degree 2: corners, then the midpoints of edges `(1,2)`,
/// `(2,0)`, `(0,1)`.
pub fn basis(degree: usize, geo: &ElementGeometry, lam: [f64; 3]) -> BasisValues {
    let g = &geo.grad_lambda;
    let n = if degree == 1 { 3 } else { 6 };
    let mut b = BasisValues {
        val: vec![0.0; n],
        da: vec![0.0; n],
        db: vec![0.0; n],
        daa: vec![0.0; n],
        dab: vec![0.0; n],
        dbb: vec![0.0; n],
    };
    if degree == 1 {
        for i in 0..3 {
            b.val[i] = lam[i];
            b.da[i] = g[i][0];
            b.db[i] = g[i][1];
        }
        return b;
    }
    for i in 0..3 {
        let c = 4.0 * lam[i] - 1.0;
        b.val[i] = lam[i] * (2.0 * lam[i] - 1.0);
        b.da[i] = c * g[i][0];
        b.db[i] = c * g[i][1];
        b.daa[i] = 4.0 * g[i][0] * g[i][0];
        b.dab[i] = 4.0 * g[i][0] * g[i][1];
        b.dbb[i] = 4.0 * g[i][1] * g[i][1];
    }
    for (e, [j, k]) in EDGE_VERTS.iter().enumerate() {
        let (j, k) = (*j, *k);
        let m = 3 + e;
        b.val[m] = 4.0 * lam[j] * lam[k];
        b.da[m] = 4.0 * (lam[k] * g[j][0] + lam[j] * g[k][0]);
        b.db[m] = 4.0 * (lam[k] * g[j][1] + lam[j] * g[k][1]);
        b.daa[m] = 8.0 * g[j][0] * g[k][0];
        b.dab[m] = 4.0 * (g[j][0] * g[k][1] + g[k][0] * g[j][1]);
        b.dbb[m] = 8.0 * g[j][1] * g[k][1];
    }
    b
}

/// Continuous Lagrange space of degree 1 or 2 on a label mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct FESpace {
    mesh: Arc<LabelMesh>,
    degree: usize,
    elem_dofs: Vec<Vec<usize>>,
    n_dofs: usize,
    geometry: Vec<ElementGeometry>,
}

impl FESpace {
    pub fn new(mesh: Arc<LabelMesh>, degree: usize) -> Result<Self, MeshError> {
        if degree != 1 && degree != 2 {
            return Err(MeshError::Degree(degree));
        }
        let nv = mesh.n_vertex_dofs();
        let vd = mesh.vertex_dof();
        let mut elem_dofs = Vec::with_capacity(mesh.triangles().len());
        for (k, t) in mesh.triangles().iter().enumerate() {
            let mut d: Vec<usize> = t.iter().map(|&v| vd[v]).collect();
            if degree == 2 {
                d.extend(mesh.elem_faces()[k].iter().map(|&f| nv + f));
            }
            elem_dofs.push(d);
        }
        let n_dofs = if degree == 1 { nv } else { nv + mesh.faces().len() };
        let geometry = (0..mesh.triangles().len()).map(|k| ElementGeometry::new(mesh.corners(k))).collect();
        Ok(FESpace { mesh, degree, elem_dofs, n_dofs, geometry })
    }

    pub fn mesh(&self) -> &Arc<LabelMesh> {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn n_local(&self) -> usize {
        if self.degree == 1 {
            3
        } else {
            6
        }
    }

    pub fn elem_dofs(&self, k: usize) -> &[usize] {
        &self.elem_dofs[k]
    }

    pub fn geometry(&self, k: usize) -> &ElementGeometry {
        &self.geometry[k]
    }

    /// Barycentric coordinates of the local nodes.
    pub fn local_nodes(&self) -> Vec<[f64; 3]> {
        let mut v = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        if self.degree == 2 {
            v.extend([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]);
        }
        v
    }

    /// Geometric label coordinates of every local node of element `k`.
    pub fn node_points(&self, k: usize) -> Vec<[f64; 2]> {
        self.local_nodes().into_iter().map(|l| self.geometry[k].point(l)).collect()
    }

    /// Label coordinates of every dof; on periodic meshes, its first
    /// geometric copy.
    pub fn dof_points(&self) -> Vec<[f64; 2]> {
        let mut pts = vec![[f64::NAN; 2]; self.n_dofs];
        for k in 0..self.elem_dofs.len() {
            for (d, p) in self.elem_dofs[k].iter().zip(self.node_points(k)) {
                if pts[*d][0].is_nan() {
                    pts[*d] = p;
                }
            }
        }
        pts
    }

    /// Nodal interpolation of `f(a, b)`. On periodic meshes the value at the
    /// first geometric copy of each node wins.
    pub fn interpolate(&self, f: &dyn Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.dof_points().into_iter().map(f).collect()
    }

    /// Degrees of freedom on the boundary of a non-periodic mesh.
    pub fn boundary_dofs(&self) -> Vec<bool> {
        let mut on = vec![false; self.n_dofs];
        let vd = self.mesh.vertex_dof();
        let nv = self.mesh.n_vertex_dofs();
        let n_int = self.mesh.interior_faces().len();
        for (fi, f) in self.mesh.faces().iter().enumerate().skip(n_int) {
            on[vd[f.vertices[0]]] = true;
            on[vd[f.vertices[1]]] = true;
            if self.degree == 2 {
                on[nv + fi] = true;
            }
        }
        on
    }
}

/// Which label coordinate, if any, is added to a field on top of its
/// coefficients. Positions `X = a + ξ` on a periodic mesh are stored through
/// their periodic displacement `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lift {
    None,
    A,
    B,
}

/// Derivative requested from [`eval_field`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Deriv {
    Value,
    A,
    B,
    T,
    AA,
    AB,
    BB,
    AT,
    BT,
}

/// Space-time field: spatial coefficients at every time knot, linear in time
/// on each slab. Storing knot values makes the field continuous in time.
#[derive(Clone, Debug, PartialEq)]
pub struct FEField {
    pub name: String,
    pub space: Arc<FESpace>,
    pub lift: Lift,
    pub knots: Vec<Vec<f64>>,
}

impl FEField {
    pub fn new(name: impl Into<String>, space: Arc<FESpace>, lift: Lift, initial: Vec<f64>) -> Result<Self, MeshError> {
        if initial.len() != space.n_dofs() {
            return Err(MeshError::Invalid(format!("{} coefficients for {} dofs", initial.len(), space.n_dofs())));
        }
        Ok(FEField { name: name.into(), space, lift, knots: vec![initial] })
    }

    /// Local coefficients of element `k` at knot `i`, lift included.
    pub fn local(&self, k: usize, i: usize) -> Vec<f64> {
        let mut c: Vec<f64> = self.space.elem_dofs(k).iter().map(|&d| self.knots[i][d]).collect();
        if self.lift != Lift::None {
            let axis = if self.lift == Lift::A { 0 } else { 1 };
            for (v, p) in c.iter_mut().zip(self.space.node_points(k)) {
                *v += p[axis];
            }
        }
        c
    }
}

/// Evaluates the field or one of its derivatives at a barycentric point of
/// triangle `tri` and time `t`.
pub fn eval_field(
    f: &FEField,
    slabs: &TimeSlabs,
    tri: usize,
    lam: [f64; 3],
    t: f64,
    req: Deriv,
) -> Result<f64, MeshError> {
    let n = slabs.locate(t)?;
    if n + 1 >= f.knots.len() {
        return Err(MeshError::OutOfSlab { t });
    }
    if matches!(req, Deriv::AA | Deriv::AB | Deriv::BB) && f.space.degree() < 2 {
        // Second label derivatives of a piecewise linear field vanish.
        return Ok(0.0);
    }
    let (t0, t1) = slabs.slab(n);
    let dt = t1 - t0;
    let th1 = (t - t0) / dt;
    let c0 = f.local(tri, n);
    let c1 = f.local(tri, n + 1);
    let b = basis(f.space.degree(), f.space.geometry(tri), lam);
    let dot = |w: &[f64], c: &[f64]| w.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let mix = |w: &[f64]| (1.0 - th1) * dot(w, &c0) + th1 * dot(w, &c1);
    let rate = |w: &[f64]| (dot(w, &c1) - dot(w, &c0)) / dt;
    Ok(match req {
        Deriv::Value => mix(&b.val),
        Deriv::A => mix(&b.da),
        Deriv::B => mix(&b.db),
        Deriv::AA => mix(&b.daa),
        Deriv::AB => mix(&b.dab),
        Deriv::BB => mix(&b.dbb),
        Deriv::T => rate(&b.val),
        Deriv::AT => rate(&b.da),
        Deriv::BT => rate(&b.db),
    })
}

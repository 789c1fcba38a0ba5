use std::sync::Arc;

use crate::mesh::{basis, BasisValues, FEField, FESpace, Lift, QuadratureRule, TimeSlabs};
use crate::swmodels::LagrangianSpec;

use super::kernels::{Kernels, Layout, J_A, J_AA, J_AB, J_AT, J_B, J_BB, J_BT, J_T, J_V};
use super::FemError;

/// Prescribed coefficient for dependent variable `w` at a boundary node with
/// label coordinates `p` and time `t`, or `None` to leave it free.
pub type DirichletFn = dyn Fn(usize, [f64; 2], f64) -> Option<f64> + Send + Sync;

/// A label-time Lagrangian discretised with one continuous Lagrange space per
/// dependent variable over a sequence of time slabs.
#[derive(Clone)]
pub struct DiscreteProblem {
    pub spec: LagrangianSpec,
    pub spaces: Vec<Arc<FESpace>>,
    pub lifts: Vec<Lift>,
    pub slabs: TimeSlabs,
    pub quad: QuadratureRule,
    pub initial: Vec<Vec<f64>>,
    pub dirichlet: Option<Arc<DirichletFn>>,
    pub(crate) kernels: Arc<Kernels>,
    pub(crate) params: Vec<f64>,
    pub(crate) offsets: Vec<usize>,
    pub(crate) xy: Option<(usize, usize)>,
}

impl std::fmt::Debug for DiscreteProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscreteProblem")
            .field("model", &self.spec.model)
            .field("deps", &self.deps())
            .field("slabs", &self.slabs.num_slabs())
            .finish()
    }
}

impl DiscreteProblem {
    /// Positions `x`, `y` are lifted by `a`, `b`; their coefficients are
    /// displacements.
    pub fn new(
        spec: LagrangianSpec,
        space: Arc<FESpace>,
        slabs: TimeSlabs,
        quad: QuadratureRule,
        initial: Vec<Vec<f64>>,
    ) -> Result<Self, FemError> {
        let n = spec.js.dependent().len();
        Self::with_spaces(spec, vec![space; n], slabs, quad, initial)
    }

    pub fn with_spaces(
        spec: LagrangianSpec,
        spaces: Vec<Arc<FESpace>>,
        slabs: TimeSlabs,
        quad: QuadratureRule,
        initial: Vec<Vec<f64>>,
    ) -> Result<Self, FemError> {
        let kernels = Arc::new(Kernels::new(&spec)?);
        let deps: Vec<String> = spec.js.dependent().iter().map(|d| d.to_string()).collect();
        if spaces.len() != deps.len() || initial.len() != deps.len() {
            return Err(FemError::Invalid(format!("{} dependent variables, {} spaces, {} initial fields", deps.len(), spaces.len(), initial.len())));
        }
        for (s, c) in spaces.iter().zip(&initial) {
            if !Arc::ptr_eq(s.mesh(), spaces[0].mesh()) && **s.mesh() != **spaces[0].mesh() {
                return Err(FemError::Invalid("all fields must share one mesh".into()));
            }
            if c.len() != s.n_dofs() {
                return Err(FemError::Invalid(format!("{} initial coefficients for {} dofs", c.len(), s.n_dofs())));
            }
        }
        let lifts = deps
            .iter()
            .map(|d| match d.as_str() {
                "x" => Lift::A,
                "y" => Lift::B,
                _ => Lift::None,
            })
            .collect();
        let mut offsets = vec![0];
        for s in &spaces {
            offsets.push(offsets.last().unwrap() + s.n_dofs());
        }
        let binding = spec.params.binding();
        let params = kernels
            .js
            .params()
            .iter()
            .map(|p| binding.get(p).ok_or_else(|| FemError::Invalid(format!("no value for parameter `{p}`"))))
            .collect::<Result<_, _>>()?;
        let xy = match (deps.iter().position(|d| d == "x"), deps.iter().position(|d| d == "y")) {
            (Some(i), Some(j)) => Some((i, j)),
            _ => None,
        };
        let p = DiscreteProblem { spec, spaces, lifts, slabs, quad, initial, dirichlet: None, kernels, params, offsets, xy };
        p.check_initial()?;
        Ok(p)
    }

    pub fn with_dirichlet(mut self, f: Arc<DirichletFn>) -> Self {
        self.dirichlet = Some(f);
        self
    }

    /// Same discretisation, different Lagrangian on the same variables, e.g.
    /// another gauge for diagnostics.
    pub fn with_lagrangian(&self, spec: LagrangianSpec) -> Result<Self, FemError> {
        let mut p = Self::with_spaces(spec, self.spaces.clone(), self.slabs.clone(), self.quad.clone(), self.initial.clone())?;
        p.dirichlet = self.dirichlet.clone();
        Ok(p)
    }

    pub fn deps(&self) -> Vec<String> {
        self.spec.js.dependent().iter().map(|d| d.to_string()).collect()
    }

    pub fn ndep(&self) -> usize {
        self.spaces.len()
    }

    pub fn n_unknowns(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn mesh(&self) -> &crate::mesh::LabelMesh {
        self.spaces[0].mesh()
    }

    pub fn n_elements(&self) -> usize {
        self.mesh().triangles().len()
    }

    /// Fields holding only the initial coefficients.
    pub fn initial_fields(&self) -> Vec<FEField> {
        self.deps()
            .into_iter()
            .zip(&self.spaces)
            .zip(&self.lifts)
            .zip(&self.initial)
            .map(|(((d, s), l), c)| FEField { name: d, space: s.clone(), lift: *l, knots: vec![c.clone()] })
            .collect()
    }

    fn check_initial(&self) -> Result<(), FemError> {
        let c: Vec<&[f64]> = self.initial.iter().map(Vec::as_slice).collect();
        let (t0, _) = self.slabs.slab(0);
        for k in 0..self.n_elements() {
            let loc = self.gather(k, &c, &c);
            for lam in &self.quad.triangle.points {
                self.check_delta(k, *lam, t0, &self.point(k, &loc, *lam, 0.0, (t0, 1.0), None).inputs)?;
            }
        }
        Ok(())
    }

    /// Local coefficients, lift included, of every field on element `k` at
    /// both ends of a slab.
    pub(crate) fn gather(&self, k: usize, c0: &[&[f64]], c1: &[&[f64]]) -> Vec<[Vec<f64>; 2]> {
        (0..self.ndep())
            .map(|w| {
                let sp = &self.spaces[w];
                let dofs = sp.elem_dofs(k);
                let mut a: Vec<f64> = dofs.iter().map(|&d| c0[w][d]).collect();
                let mut b: Vec<f64> = dofs.iter().map(|&d| c1[w][d]).collect();
                if self.lifts[w] != Lift::None {
                    let axis = if self.lifts[w] == Lift::A { 0 } else { 1 };
                    for (i, p) in sp.node_points(k).iter().enumerate() {
                        a[i] += p[axis];
                        b[i] += p[axis];
                    }
                }
                [a, b]
            })
            .collect()
    }

    /// Kernel inputs at barycentric point `lam` and slab fraction `tau`.
    pub(crate) fn point(
        &self,
        k: usize,
        loc: &[[Vec<f64>; 2]],
        lam: [f64; 3],
        tau: f64,
        (t0, dt): (f64, f64),
        phi: Option<[f64; 3]>,
    ) -> PointData {
        let lay: Layout = self.kernels.layout;
        let mut inputs = vec![0.0; lay.len()];
        let mut bases: Vec<BasisValues> = Vec::with_capacity(self.ndep());
        let geo = self.spaces[0].geometry(k);
        for w in 0..self.ndep() {
            let b = basis(self.spaces[w].degree(), self.spaces[w].geometry(k), lam);
            let [c0, c1] = &loc[w];
            let dot = |v: &[f64], c: &[f64]| v.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
            for (j, v) in [(J_V, &b.val), (J_A, &b.da), (J_B, &b.db), (J_AA, &b.daa), (J_AB, &b.dab), (J_BB, &b.dbb)] {
                let (v0, v1) = (dot(v, c0), dot(v, c1));
                inputs[lay.jet(w, j)] = (1.0 - tau) * v0 + tau * v1;
                match j {
                    J_V => inputs[lay.jet(w, J_T)] = (v1 - v0) / dt,
                    J_A => inputs[lay.jet(w, J_AT)] = (v1 - v0) / dt,
                    J_B => inputs[lay.jet(w, J_BT)] = (v1 - v0) / dt,
                    _ => {}
                }
            }
            bases.push(b);
        }
        let p = geo.point(lam);
        inputs[lay.indep(0)] = p[0];
        inputs[lay.indep(1)] = p[1];
        inputs[lay.indep(2)] = t0 + tau * dt;
        for (i, v) in self.params.iter().enumerate() {
            inputs[lay.param(i)] = *v;
        }
        if let Some(ph) = phi {
            for (i, v) in ph.iter().enumerate() {
                inputs[lay.phi(i)] = *v;
            }
        }
        PointData { inputs, bases }
    }

    pub(crate) fn check_delta(&self, k: usize, lam: [f64; 3], t: f64, inputs: &[f64]) -> Result<(), FemError> {
        if let Some((ix, iy)) = self.xy {
            let lay = self.kernels.layout;
            let d = inputs[lay.jet(ix, J_A)] * inputs[lay.jet(iy, J_B)] - inputs[lay.jet(ix, J_B)] * inputs[lay.jet(iy, J_A)];
            if !(d > 0.0) {
                let p = self.spaces[0].geometry(k).point(lam);
                return Err(FemError::NonPositiveJacobian { element: k, point: p, t, delta: d });
            }
        }
        Ok(())
    }
}

pub(crate) struct PointData {
    pub inputs: Vec<f64>,
    pub bases: Vec<BasisValues>,
}

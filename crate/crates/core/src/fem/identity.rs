use rayon::prelude::*;

use crate::mesh::{ElementGeometry, FEField, FESpace, Lift, TriangleRule};
use crate::symexpr::{total_derivative, Atom, Compiled, Expr};

use super::assembly::slab_coeffs;
use super::kernels::{fe_generator, CurrentKernel, JETS, NJ};
use super::problem::DiscreteProblem;
use super::FemError;

/// Stream functions `φ(a, b)` for relabelling symmetries, each a polynomial
/// on every element so the identities are integrated exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum StreamFunction {
    Constant(f64),
    /// `c0 + c1 a + c2 b`.
    Linear([f64; 3]),
    /// Piecewise-linear hat of a vertex dof.
    Hat(usize),
    /// Fifth power of the hat of a vertex dof.
    PatchBump(usize),
    /// `β((a - ca)/ra) β((b - cb)/rb)` with `β(s) = (1 - s²)³` on `|s| < 1`.
    /// Exact when the support edges lie on mesh lines.
    TensorBump { centre: [f64; 2], radius: [f64; 2] },
    /// `(27 λ0 λ1 λ2)³` inside a triangle, zero outside. Exact on meshes
    /// nested in that triangle's mesh.
    Bubble { corners: [[f64; 2]; 3] },
}

fn beta(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let q = 1.0 - s * s;
    (q * q * q, -6.0 * s * q * q)
}

impl StreamFunction {
    /// `(φ, φ_a, φ_b)` on element `k` at barycentric point `lam`.
    pub fn eval(&self, space: &FESpace, k: usize, lam: [f64; 3]) -> [f64; 3] {
        let geo = space.geometry(k);
        let p = geo.point(lam);
        match self {
            StreamFunction::Constant(c) => [*c, 0.0, 0.0],
            StreamFunction::Linear(c) => [c[0] + c[1] * p[0] + c[2] * p[1], c[1], c[2]],
            StreamFunction::Hat(d) | StreamFunction::PatchBump(d) => {
                let pow = if matches!(self, StreamFunction::Hat(_)) { 1 } else { 5 };
                let mesh = space.mesh();
                let mut out = [0.0; 3];
                for (i, &v) in mesh.triangles()[k].iter().enumerate() {
                    if mesh.vertex_dof()[v] == *d {
                        let l = lam[i];
                        let dl = pow as f64 * l.powi(pow - 1);
                        out[0] += l.powi(pow);
                        out[1] += dl * geo.grad_lambda[i][0];
                        out[2] += dl * geo.grad_lambda[i][1];
                    }
                }
                out
            }
            StreamFunction::TensorBump { centre, radius } => {
                let (ba, da) = beta((p[0] - centre[0]) / radius[0]);
                let (bb, db) = beta((p[1] - centre[1]) / radius[1]);
                [ba * bb, da * bb / radius[0], ba * db / radius[1]]
            }
            StreamFunction::Bubble { corners } => {
                let cg = ElementGeometry::new(*corners);
                let centroid = geo.point([1.0 / 3.0; 3]);
                if cg.barycentric(centroid).iter().any(|&l| l < 0.0) {
                    return [0.0; 3];
                }
                let l = cg.barycentric(p);
                let g = &cg.grad_lambda;
                let b = 27.0 * l[0] * l[1] * l[2];
                let db = |c: usize| 27.0 * (g[0][c] * l[1] * l[2] + l[0] * g[1][c] * l[2] + l[0] * l[1] * g[2][c]);
                [b * b * b, 3.0 * b * b * db(0), 3.0 * b * b * db(1)]
            }
        }
    }
}

/// The three integrals of a discrete Noether identity on one slab.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoetherTerms {
    /// `∫∫ Σ_w Q^w E^w`.
    pub volume: f64,
    /// `[∫ A^t]` between the slab ends.
    pub boundary: f64,
    /// `Σ_faces ∫∫ [[A·n]]`, left minus right.
    pub jump: f64,
    pub sum: f64,
}

impl NoetherTerms {
    fn new(volume: f64, boundary: f64, jump: f64) -> Self {
        NoetherTerms { volume, boundary, jump, sum: volume + boundary + jump }
    }

    /// Largest magnitude of the three terms.
    pub fn scale(&self) -> f64 {
        self.volume.abs().max(self.boundary.abs()).max(self.jump.abs())
    }
}

/// Current of a named symmetry of the problem's Lagrangian: `energy`,
/// `momentum-a`, `momentum-b`, `angular` or `pv`.
pub fn current_for(p: &DiscreteProblem, name: &str) -> Result<CurrentKernel, FemError> {
    let g = fe_generator(&p.kernels, &p.spec, name)?;
    p.kernels.current(&p.spec, &g)
}

fn q_dot_e(nd: usize, cur: &[f64], e: &[f64]) -> f64 {
    (0..nd).map(|w| cur[w] * e[w]).sum()
}

/// Volume, time-boundary and face-jump integrals of the Noether identity of
/// `cur` over slab `n`. Holds for any coefficients; the terms sum to zero up
/// to quadrature error.
pub fn fe_noether_terms(
    p: &DiscreteProblem,
    fields: &[FEField],
    n: usize,
    cur: &CurrentKernel,
    phi: Option<&StreamFunction>,
) -> Result<NoetherTerms, FemError> {
    let (c0, c1) = slab_coeffs(p, fields, n)?;
    let (t0, t1) = p.slabs.slab(n);
    let dt = t1 - t0;
    let nd = p.ndep();
    let sp = &p.spaces[0];
    let phi_at = |k: usize, lam: [f64; 3]| phi.map(|f| f.eval(sp, k, lam));
    let nout = cur.compiled.num_outputs();
    let at = nd + 2;

    let elems: Vec<(f64, f64)> = (0..p.n_elements())
        .into_par_iter()
        .map(|k| {
            let loc = p.gather(k, &c0, &c1);
            let area2 = 2.0 * sp.geometry(k).area;
            let (mut vol, mut bnd) = (0.0, 0.0);
            let mut scratch = Vec::new();
            let mut e = vec![0.0; nd];
            let mut a = vec![0.0; nout];
            for (&tau, &wt) in p.quad.time.points.iter().zip(&p.quad.time.weights) {
                for (lam, &ws) in p.quad.triangle.points.iter().zip(&p.quad.triangle.weights) {
                    let pd = p.point(k, &loc, *lam, tau, (t0, dt), phi_at(k, *lam));
                    p.kernels.strong.eval_into(&pd.inputs, &mut scratch, &mut e);
                    cur.compiled.eval_into(&pd.inputs, &mut scratch, &mut a);
                    vol += ws * area2 * wt * dt * q_dot_e(nd, &a, &e);
                }
            }
            for (tau, sign) in [(0.0, -1.0), (1.0, 1.0)] {
                for (lam, &ws) in p.quad.triangle.points.iter().zip(&p.quad.triangle.weights) {
                    let pd = p.point(k, &loc, *lam, tau, (t0, dt), phi_at(k, *lam));
                    cur.compiled.eval_into(&pd.inputs, &mut scratch, &mut a);
                    bnd += sign * ws * area2 * a[at];
                }
            }
            (vol, bnd)
        })
        .collect();
    let jumps: Vec<f64> = p
        .mesh()
        .faces()
        .par_iter()
        .map(|f| {
            let mut s = 0.0;
            let mut scratch = Vec::new();
            let mut a = vec![0.0; nout];
            for (side, sign) in [(false, 1.0), (true, -1.0)] {
                let Some((k, _)) = f.trace_point(side, 0.0) else { continue };
                let loc = p.gather(k, &c0, &c1);
                for (&tau, &wt) in p.quad.time.points.iter().zip(&p.quad.time.weights) {
                    for (&r, &we) in p.quad.edge.points.iter().zip(&p.quad.edge.weights) {
                        let (_, lam) = f.trace_point(side, r).unwrap();
                        let pd = p.point(k, &loc, lam, tau, (t0, dt), phi_at(k, lam));
                        cur.compiled.eval_into(&pd.inputs, &mut scratch, &mut a);
                        s += sign * we * f.length * wt * dt * (a[nd] * f.normal[0] + a[nd + 1] * f.normal[1]);
                    }
                }
            }
            s
        })
        .collect();
    let volume = elems.iter().map(|e| e.0).sum();
    let boundary = elems.iter().map(|e| e.1).sum();
    Ok(NoetherTerms::new(volume, boundary, jumps.iter().sum()))
}

/// Relabelling identity for stream function `phi`.
pub fn fe_pv_residual(p: &DiscreteProblem, fields: &[FEField], n: usize, phi: &StreamFunction) -> Result<NoetherTerms, FemError> {
    fe_noether_terms(p, fields, n, &current_for(p, "pv")?, Some(phi))
}

/// `∫_Ω A^t` at every time knot the fields reach. Knot 0 is read from the
/// start of slab 0, knot `n > 0` from the end of slab `n - 1`.
pub fn conserved_quantity_series(
    p: &DiscreteProblem,
    fields: &[FEField],
    cur: &CurrentKernel,
    phi: Option<&StreamFunction>,
) -> Result<Vec<f64>, FemError> {
    let nk = fields.iter().map(|f| f.knots.len()).min().unwrap_or(0);
    if nk < 2 {
        return Err(FemError::Invalid("conserved series needs at least one solved slab".into()));
    }
    let mut out = vec![density_integral(p, fields, 0, 0.0, cur, phi)?];
    for n in 0..nk - 1 {
        out.push(density_integral(p, fields, n, 1.0, cur, phi)?);
    }
    Ok(out)
}

fn density_integral(p: &DiscreteProblem, fields: &[FEField], n: usize, tau: f64, cur: &CurrentKernel, phi: Option<&StreamFunction>) -> Result<f64, FemError> {
    let nd = p.ndep();
    Ok(slab_point_integrals(p, fields, n, tau, cur, phi)?.iter().map(|v| v[nd + 2]).sum())
}

/// Per-element integrals of every output of `cur` at slab fraction `tau`.
fn slab_point_integrals(
    p: &DiscreteProblem,
    fields: &[FEField],
    n: usize,
    tau: f64,
    cur: &CurrentKernel,
    phi: Option<&StreamFunction>,
) -> Result<Vec<Vec<f64>>, FemError> {
    let (c0, c1) = slab_coeffs(p, fields, n)?;
    let (t0, t1) = p.slabs.slab(n);
    let sp = &p.spaces[0];
    let nout = cur.compiled.num_outputs();
    Ok((0..p.n_elements())
        .into_par_iter()
        .map(|k| {
            let loc = p.gather(k, &c0, &c1);
            let area2 = 2.0 * sp.geometry(k).area;
            let mut acc = vec![0.0; nout];
            let mut a = vec![0.0; nout];
            let mut scratch = Vec::new();
            for (lam, &ws) in p.quad.triangle.points.iter().zip(&p.quad.triangle.weights) {
                let pd = p.point(k, &loc, *lam, tau, (t0, t1 - t0), phi.map(|f| f.eval(sp, k, *lam)));
                cur.compiled.eval_into(&pd.inputs, &mut scratch, &mut a);
                for (s, v) in acc.iter_mut().zip(&a) {
                    *s += ws * area2 * v;
                }
            }
            acc
        })
        .collect())
}

/// Instantaneous form of the relabelling identity at knot `t_n`, read from
/// the start of slab `n` (or the end of the last slab).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WeakPvReport {
    /// `∫_Ω Σ Q^w E^w` at `t_n`.
    pub volume: f64,
    /// `d/dt ∫_Ω A^t` at `t_n`.
    pub rate: f64,
    /// `Σ_faces ∫ [[A·n]]` at `t_n`.
    pub jump: f64,
    pub sum: f64,
    /// `d/dt ∫_Ω A^t` of the smooth flow the fields approximate, if given.
    pub rate_exact: Option<f64>,
    /// `|rate - rate_exact|`, or `|rate|` without a reference flow.
    pub residual: f64,
}

/// Fields given by closed-form expressions in `(a, b, t)`, one per dependent
/// variable, positions as full coordinates.
#[derive(Clone, Debug)]
pub struct ManufacturedFlow {
    pub exprs: Vec<Expr>,
    jets: Compiled,
}

impl ManufacturedFlow {
    pub fn new(p: &DiscreteProblem, exprs: Vec<Expr>) -> Result<Self, FemError> {
        if exprs.len() != p.ndep() {
            return Err(FemError::Invalid(format!("{} expressions for {} dependent variables", exprs.len(), p.ndep())));
        }
        let js = &p.kernels.js;
        let slots: Vec<Atom> = ["a", "b", "t"].iter().map(|s| Atom::Indep((*s).into())).collect();
        let mut all = Vec::with_capacity(exprs.len() * NJ);
        for e in &exprs {
            if e.leaves().iter().any(|a| !slots.contains(a)) {
                return Err(FemError::Invalid("manufactured fields may only depend on a, b, t".into()));
            }
            for j in JETS {
                let mut d = e.clone();
                for s in j {
                    d = total_derivative(js, &d, s)?;
                }
                all.push(d);
            }
        }
        Ok(ManufacturedFlow { jets: Compiled::new(&all, &slots)?, exprs })
    }

    /// A smooth non-trivial deformation `x = a + ε s(t) b²`, `y = b + ε s(t) a²`
    /// with `s = t + t²`; the next two variables get `ε s'(t) (b², a²)`, any
    /// further ones zero.
    pub fn polynomial(p: &DiscreteProblem, eps: i64, denom: i64) -> Result<Self, FemError> {
        let (a, b, t) = (Expr::indep("a"), Expr::indep("b"), Expr::indep("t"));
        let eps = Expr::rational(eps, denom);
        let s = &t + &t.powi(2);
        let ds = &Expr::one() + &t.scale(2.into());
        let sq = [b.powi(2), a.powi(2)];
        let mut exprs = vec![&a + &(&(&eps * &s) * &sq[0]), &b + &(&(&eps * &s) * &sq[1])];
        for w in 2..p.ndep() {
            exprs.push(if w < 4 { &(&eps * &ds) * &sq[w - 2] } else { Expr::zero() });
        }
        let mut deps = p.deps();
        deps.truncate(2);
        if deps != ["x", "y"] {
            return Err(FemError::Invalid("manufactured flow expects positions x, y first".into()));
        }
        Self::new(p, exprs)
    }

    /// Jets of every variable, in kernel slot order.
    pub fn jets(&self, ab: [f64; 2], t: f64) -> Vec<f64> {
        self.jets.eval(&[ab[0], ab[1], t])
    }

    /// Nodal interpolant at every knot of the problem's slabs.
    pub fn interpolate(&self, p: &DiscreteProblem) -> Vec<FEField> {
        let mut fields = p.initial_fields();
        for (w, f) in fields.iter_mut().enumerate() {
            let pts = f.space.dof_points();
            let lift = f.lift;
            f.knots = p
                .slabs
                .knots()
                .iter()
                .map(|&t| {
                    pts.iter()
                        .map(|&q| {
                            let v = self.jets(q, t)[w * NJ];
                            match lift {
                                Lift::None => v,
                                Lift::A => v - q[0],
                                Lift::B => v - q[1],
                            }
                        })
                        .collect()
                })
                .collect();
        }
        fields
    }

    /// `d/dt ∫_Ω A^t` of the flow itself, by a quadrature of degree `degree`
    /// on the problem's mesh.
    pub fn exact_rate(&self, p: &DiscreteProblem, cur: &CurrentKernel, phi: Option<&StreamFunction>, t: f64, degree: usize) -> Result<f64, FemError> {
        let rule = TriangleRule::with_degree(degree)?;
        let lay = p.kernels.layout;
        let sp = &p.spaces[0];
        let nout = cur.compiled.num_outputs();
        let parts: Vec<f64> = (0..p.n_elements())
            .into_par_iter()
            .map(|k| {
                let geo = sp.geometry(k);
                let mut s = 0.0;
                let mut out = vec![0.0; nout];
                let mut scratch = Vec::new();
                let mut inputs = vec![0.0; lay.len()];
                for (lam, &ws) in rule.points.iter().zip(&rule.weights) {
                    let q = geo.point(*lam);
                    let jets = self.jets(q, t);
                    inputs[..jets.len()].copy_from_slice(&jets);
                    inputs[lay.indep(0)] = q[0];
                    inputs[lay.indep(1)] = q[1];
                    inputs[lay.indep(2)] = t;
                    for (i, v) in p.params.iter().enumerate() {
                        inputs[lay.param(i)] = *v;
                    }
                    let ph = phi.map_or([0.0; 3], |f| f.eval(sp, k, *lam));
                    for i in 0..3 {
                        inputs[lay.phi(i)] = ph[i];
                    }
                    cur.compiled.eval_into(&inputs, &mut scratch, &mut out);
                    s += ws * 2.0 * geo.area * out[nout - 1];
                }
                s
            })
            .collect();
        Ok(parts.iter().sum())
    }
}

/// The relabelling identity at the single time `t_n`: volume, rate of the
/// PV moment and face jumps, compared against `reference` when given. At an
/// interior knot every term is the mean of its values from the two adjacent
/// slabs; the time derivative is one-sided at the first and last knot.
pub fn weak_pv_limit(
    p: &DiscreteProblem,
    fields: &[FEField],
    n: usize,
    phi: &StreamFunction,
    reference: Option<&ManufacturedFlow>,
) -> Result<WeakPvReport, FemError> {
    let ns = p.slabs.num_slabs();
    if n > ns {
        return Err(FemError::Invalid(format!("knot {n} beyond the last slab")));
    }
    let cur = current_for(p, "pv")?;
    let mut sides = Vec::new();
    if n > 0 {
        sides.push(instant_terms(p, fields, n - 1, 1.0, phi, &cur)?);
    }
    if n < ns && fields.iter().all(|f| f.knots.len() > n + 1) {
        sides.push(instant_terms(p, fields, n, 0.0, phi, &cur)?);
    }
    if sides.is_empty() {
        return Err(FemError::Invalid(format!("no solved slab next to knot {n}")));
    }
    let m = sides.len() as f64;
    let [volume, rate, jump] = [0, 1, 2].map(|i| sides.iter().map(|s| s[i]).sum::<f64>() / m);
    let t = p.slabs.knots()[n];
    let rate_exact = reference.map(|r| r.exact_rate(p, &cur, Some(phi), t, 20)).transpose()?;
    let residual = (rate - rate_exact.unwrap_or(0.0)).abs();
    Ok(WeakPvReport { volume, rate, jump, sum: volume + rate + jump, rate_exact, residual })
}

/// `[volume, rate, jump]` at slab fraction `tau` of slab `slab`.
fn instant_terms(p: &DiscreteProblem, fields: &[FEField], slab: usize, tau: f64, phi: &StreamFunction, cur: &CurrentKernel) -> Result<[f64; 3], FemError> {
    let (c0, c1) = slab_coeffs(p, fields, slab)?;
    let (t0, t1) = p.slabs.slab(slab);
    let dt = t1 - t0;
    let nd = p.ndep();
    let sp = &p.spaces[0];
    let nout = cur.compiled.num_outputs();
    let elems: Vec<(f64, f64)> = (0..p.n_elements())
        .into_par_iter()
        .map(|k| {
            let loc = p.gather(k, &c0, &c1);
            let area2 = 2.0 * sp.geometry(k).area;
            let (mut vol, mut rate) = (0.0, 0.0);
            let mut scratch = Vec::new();
            let mut e = vec![0.0; nd];
            let mut a = vec![0.0; nout];
            for (lam, &ws) in p.quad.triangle.points.iter().zip(&p.quad.triangle.weights) {
                let pd = p.point(k, &loc, *lam, tau, (t0, dt), Some(phi.eval(sp, k, *lam)));
                p.kernels.strong.eval_into(&pd.inputs, &mut scratch, &mut e);
                cur.compiled.eval_into(&pd.inputs, &mut scratch, &mut a);
                vol += ws * area2 * q_dot_e(nd, &a, &e);
                rate += ws * area2 * a[nout - 1];
            }
            (vol, rate)
        })
        .collect();
    let jumps: Vec<f64> = p
        .mesh()
        .faces()
        .par_iter()
        .map(|f| {
            let mut s = 0.0;
            let mut scratch = Vec::new();
            let mut a = vec![0.0; nout];
            for (side, sign) in [(false, 1.0), (true, -1.0)] {
                let Some((k, _)) = f.trace_point(side, 0.0) else { continue };
                let loc = p.gather(k, &c0, &c1);
                for (&r, &we) in p.quad.edge.points.iter().zip(&p.quad.edge.weights) {
                    let (_, lam) = f.trace_point(side, r).unwrap();
                    let pd = p.point(k, &loc, lam, tau, (t0, dt), Some(phi.eval(sp, k, lam)));
                    cur.compiled.eval_into(&pd.inputs, &mut scratch, &mut a);
                    s += sign * we * f.length * (a[nd] * f.normal[0] + a[nd + 1] * f.normal[1]);
                }
            }
            s
        })
        .collect();
    Ok([elems.iter().map(|e| e.0).sum(), elems.iter().map(|e| e.1).sum(), jumps.iter().sum()])
}

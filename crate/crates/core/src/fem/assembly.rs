use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::mesh::{BasisValues, FEField};

use super::kernels::{J_A, J_B, J_T};
use super::problem::DiscreteProblem;
use super::FemError;

/// How the slab residual is assembled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    /// `∂S/∂V` of the slab action minus the time-boundary term
    /// `[∫ ∂L/∂W_t V]` at the slab ends.
    ActionVariation,
    /// `∫∫ E^w V` over elements plus `∫ [[∂L/∂W_n]] V` over faces.
    EulerLagrange,
}

/// Residual of the discrete Euler-Lagrange equations on slab `n` for test
/// functions `V = N_j(a, b)`, constant in time, one block per dependent
/// variable. Uses the coefficients stored at knots `n` and `n + 1`.
pub fn assemble_el_residual(p: &DiscreteProblem, fields: &[FEField], n: usize, route: Route) -> Result<Vec<f64>, FemError> {
    let (c0, c1) = slab_coeffs(p, fields, n)?;
    match route {
        Route::ActionVariation => Ok(residual_action(p, n, &c0, &c1, false)?.0),
        Route::EulerLagrange => residual_el(p, n, &c0, &c1),
    }
}

pub(crate) fn slab_coeffs<'a>(p: &DiscreteProblem, fields: &'a [FEField], n: usize) -> Result<(Vec<&'a [f64]>, Vec<&'a [f64]>), FemError> {
    if fields.len() != p.ndep() {
        return Err(FemError::Invalid(format!("{} fields for {} dependent variables", fields.len(), p.ndep())));
    }
    if n >= p.slabs.num_slabs() || fields.iter().any(|f| f.knots.len() < n + 2) {
        return Err(FemError::Invalid(format!("slab {n} has no end coefficients")));
    }
    Ok((fields.iter().map(|f| f.knots[n].as_slice()).collect(), fields.iter().map(|f| f.knots[n + 1].as_slice()).collect()))
}

struct LocalLayout {
    start: Vec<usize>,
    len: usize,
}

impl LocalLayout {
    fn new(p: &DiscreteProblem) -> Self {
        let mut start = vec![0];
        for s in &p.spaces {
            start.push(start.last().unwrap() + s.n_local());
        }
        let len = *start.last().unwrap();
        LocalLayout { start, len }
    }
}

fn test_fn(b: &BasisValues, d: usize, i: usize) -> f64 {
    match d {
        0 => b.val[i],
        1 => b.da[i],
        2 => b.db[i],
        _ => 0.0,
    }
}

/// Derivative of jet `d` of a field with respect to its coefficient `m` at
/// the end of the slab.
fn trial_fn(b: &BasisValues, d: usize, m: usize, tau: f64, dt: f64) -> f64 {
    match d {
        0 => b.val[m] * tau,
        1 => b.da[m] * tau,
        2 => b.db[m] * tau,
        _ => b.val[m] / dt,
    }
}

fn scatter(p: &DiscreteProblem, ll: &LocalLayout, k: usize) -> Vec<usize> {
    let mut g = Vec::with_capacity(ll.len);
    for (w, s) in p.spaces.iter().enumerate() {
        g.extend(s.elem_dofs(k).iter().map(|&d| p.offsets[w] + d));
    }
    g
}

/// Route-A residual and, optionally, its Jacobian in the end-of-slab
/// coefficients.
pub(crate) fn residual_action(
    p: &DiscreteProblem,
    n: usize,
    c0: &[&[f64]],
    c1: &[&[f64]],
    jacobian: bool,
) -> Result<(Vec<f64>, Option<DMatrix<f64>>), FemError> {
    let ker = &p.kernels;
    let nd = p.ndep();
    let ll = LocalLayout::new(p);
    let (t0, t1) = p.slabs.slab(n);
    let dt = t1 - t0;
    let pairs = &ker.hess_pairs;
    let locals: Vec<(Vec<f64>, Vec<f64>)> = (0..p.n_elements())
        .into_par_iter()
        .map(|k| -> Result<_, FemError> {
            let loc = p.gather(k, c0, c1);
            let area2 = 2.0 * p.spaces[0].geometry(k).area;
            let mut r = vec![0.0; ll.len];
            let mut jm = if jacobian { vec![0.0; ll.len * ll.len] } else { Vec::new() };
            let mut scratch = Vec::new();
            let mut g = vec![0.0; ker.weak.num_outputs()];
            let mut h = vec![0.0; ker.hess.num_outputs()];
            let add = |jm: &mut Vec<f64>, wgt: f64, hv: f64, pr: (usize, usize), pc: (usize, usize), b: &[BasisValues], tau: f64, row_test: bool| {
                // pr = (w, d) of the row variable, pc = (w', d') of the column.
                let (wr, dr) = pr;
                let (wc, dc) = pc;
                for i in 0..p.spaces[wr].n_local() {
                    let ti = if row_test { test_fn(&b[wr], dr, i) } else { b[wr].val[i] };
                    if ti == 0.0 {
                        continue;
                    }
                    let row = ll.start[wr] + i;
                    for m in 0..p.spaces[wc].n_local() {
                        jm[row * ll.len + ll.start[wc] + m] += wgt * hv * ti * trial_fn(&b[wc], dc, m, tau, dt);
                    }
                }
            };
            for (&tau, &wt) in p.quad.time.points.iter().zip(&p.quad.time.weights) {
                for (lam, &ws) in p.quad.triangle.points.iter().zip(&p.quad.triangle.weights) {
                    let pd = p.point(k, &loc, *lam, tau, (t0, dt), None);
                    p.check_delta(k, *lam, t0 + tau * dt, &pd.inputs)?;
                    let wgt = ws * area2 * wt * dt;
                    ker.weak.eval_into(&pd.inputs, &mut scratch, &mut g);
                    for w in 0..nd {
                        for i in 0..p.spaces[w].n_local() {
                            let b = &pd.bases[w];
                            r[ll.start[w] + i] += wgt * (g[1 + 4 * w] * b.val[i] + g[2 + 4 * w] * b.da[i] + g[3 + 4 * w] * b.db[i]);
                        }
                    }
                    if jacobian {
                        ker.hess.eval_into(&pd.inputs, &mut scratch, &mut h);
                        for (&(pp, qq), &hv) in pairs.iter().zip(&h) {
                            let (a, c) = ((pp / 4, pp % 4), (qq / 4, qq % 4));
                            add(&mut jm, wgt, hv, a, c, &pd.bases, tau, true);
                            if pp != qq {
                                add(&mut jm, wgt, hv, c, a, &pd.bases, tau, true);
                            }
                        }
                    }
                }
            }
            for (tau, sign) in [(0.0, 1.0), (1.0, -1.0)] {
                for (lam, &ws) in p.quad.triangle.points.iter().zip(&p.quad.triangle.weights) {
                    let pd = p.point(k, &loc, *lam, tau, (t0, dt), None);
                    let wgt = sign * ws * area2;
                    ker.weak.eval_into(&pd.inputs, &mut scratch, &mut g);
                    for w in 0..nd {
                        for i in 0..p.spaces[w].n_local() {
                            r[ll.start[w] + i] += wgt * g[1 + 4 * w + J_T] * pd.bases[w].val[i];
                        }
                    }
                    if jacobian {
                        ker.hess.eval_into(&pd.inputs, &mut scratch, &mut h);
                        for (&(pp, qq), &hv) in pairs.iter().zip(&h) {
                            let (a, c) = ((pp / 4, pp % 4), (qq / 4, qq % 4));
                            if a.1 == J_T {
                                add(&mut jm, wgt, hv, a, c, &pd.bases, tau, false);
                            }
                            if pp != qq && c.1 == J_T {
                                add(&mut jm, wgt, hv, c, a, &pd.bases, tau, false);
                            }
                        }
                    }
                }
            }
            Ok((r, jm))
        })
        .collect::<Result<_, _>>()?;

    let nu = p.n_unknowns();
    let mut res = vec![0.0; nu];
    let mut jac = jacobian.then(|| DMatrix::<f64>::zeros(nu, nu));
    for (k, (r, jm)) in locals.into_iter().enumerate() {
        let gi = scatter(p, &ll, k);
        for (a, &ga) in gi.iter().enumerate() {
            res[ga] += r[a];
        }
        if let Some(j) = jac.as_mut() {
            for (a, &ga) in gi.iter().enumerate() {
                for (c, &gc) in gi.iter().enumerate() {
                    j[(ga, gc)] += jm[a * ll.len + c];
                }
            }
        }
    }
    Ok((res, jac))
}

/// Route-B residual: strong Euler-Lagrange expressions inside elements plus
/// jumps of the normal flux `∂L/∂W_n` across faces (left minus right, with
/// the left triangle's outward normal), one-sided on boundary faces.
pub(crate) fn residual_el(p: &DiscreteProblem, n: usize, c0: &[&[f64]], c1: &[&[f64]]) -> Result<Vec<f64>, FemError> {
    let ker = &p.kernels;
    let nd = p.ndep();
    let ll = LocalLayout::new(p);
    let (t0, t1) = p.slabs.slab(n);
    let dt = t1 - t0;
    let vol: Vec<Vec<f64>> = (0..p.n_elements())
        .into_par_iter()
        .map(|k| {
            let loc = p.gather(k, c0, c1);
            let area2 = 2.0 * p.spaces[0].geometry(k).area;
            let mut r = vec![0.0; ll.len];
            let mut scratch = Vec::new();
            let mut e = vec![0.0; nd];
            for (&tau, &wt) in p.quad.time.points.iter().zip(&p.quad.time.weights) {
                for (lam, &ws) in p.quad.triangle.points.iter().zip(&p.quad.triangle.weights) {
                    let pd = p.point(k, &loc, *lam, tau, (t0, dt), None);
                    ker.strong.eval_into(&pd.inputs, &mut scratch, &mut e);
                    let wgt = ws * area2 * wt * dt;
                    for w in 0..nd {
                        for i in 0..p.spaces[w].n_local() {
                            r[ll.start[w] + i] += wgt * e[w] * pd.bases[w].val[i];
                        }
                    }
                }
            }
            r
        })
        .collect();
    let faces = p.mesh().faces();
    let face_terms: Vec<[(usize, Vec<f64>); 2]> = faces
        .par_iter()
        .map(|f| {
            let mut out = [(f.left.0, vec![0.0; ll.len]), (f.right.map_or(usize::MAX, |r| r.0), vec![0.0; ll.len])];
            let mut scratch = Vec::new();
            let mut g = vec![0.0; ker.weak.num_outputs()];
            for (side, sign) in [(false, 1.0), (true, -1.0)] {
                let Some((k, _)) = f.trace_point(side, 0.0) else { continue };
                let loc = p.gather(k, c0, c1);
                let buf = &mut out[side as usize].1;
                for (&tau, &wt) in p.quad.time.points.iter().zip(&p.quad.time.weights) {
                    for (&s, &we) in p.quad.edge.points.iter().zip(&p.quad.edge.weights) {
                        let (_, lam) = f.trace_point(side, s).unwrap();
                        let pd = p.point(k, &loc, lam, tau, (t0, dt), None);
                        ker.weak.eval_into(&pd.inputs, &mut scratch, &mut g);
                        let wgt = sign * we * f.length * wt * dt;
                        for w in 0..nd {
                            let gn = g[1 + 4 * w + J_A] * f.normal[0] + g[1 + 4 * w + J_B] * f.normal[1];
                            for i in 0..p.spaces[w].n_local() {
                                buf[ll.start[w] + i] += wgt * gn * pd.bases[w].val[i];
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut res = vec![0.0; p.n_unknowns()];
    for (k, r) in vol.into_iter().enumerate() {
        for (a, ga) in scatter(p, &ll, k).into_iter().enumerate() {
            res[ga] += r[a];
        }
    }
    for sides in face_terms {
        for (k, r) in sides {
            if k == usize::MAX {
                continue;
            }
            for (a, ga) in scatter(p, &ll, k).into_iter().enumerate() {
                res[ga] += r[a];
            }
        }
    }
    Ok(res)
}

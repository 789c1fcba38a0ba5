use crate::mesh::{FEField, Lift};

use super::assembly::residual_action;
use super::problem::DiscreteProblem;
use super::FemError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Stop when the residual ∞-norm is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Step shrink factor of the backtracking line search, in `(0, 1)`.
    pub backtrack: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-10, max_iter: 30, backtrack: 0.5 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), FemError> {
        if !(self.tol > 0.0) {
            return Err(FemError::Invalid("solver tolerance must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(FemError::Invalid("max_iter must be at least 1".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(FemError::Invalid("backtracking factor must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlabReport {
    pub slab: usize,
    pub iterations: usize,
    /// Residual ∞-norm before each Newton step and after the last.
    pub residual_history: Vec<f64>,
}

/// Fields over all knots plus per-slab Newton statistics.
#[derive(Clone, Debug)]
pub struct Solution {
    pub fields: Vec<FEField>,
    pub reports: Vec<SlabReport>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `(global index, coefficient)` pairs fixed by the boundary condition at
/// time `t`.
fn constraints(p: &DiscreteProblem, t: f64) -> Vec<(usize, f64)> {
    let Some(g) = &p.dirichlet else { return Vec::new() };
    if p.mesh().is_periodic() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (w, sp) in p.spaces.iter().enumerate() {
        let pts = sp.dof_points();
        for (d, on) in sp.boundary_dofs().into_iter().enumerate() {
            if !on {
                continue;
            }
            if let Some(v) = g(w, pts[d], t) {
                let lift = match p.lifts[w] {
                    Lift::None => 0.0,
                    Lift::A => pts[d][0],
                    Lift::B => pts[d][1],
                };
                out.push((p.offsets[w] + d, v - lift));
            }
        }
    }
    out
}

fn split(p: &DiscreteProblem, flat: &[f64]) -> Vec<Vec<f64>> {
    (0..p.ndep()).map(|w| flat[p.offsets[w]..p.offsets[w + 1]].to_vec()).collect()
}

fn residual(p: &DiscreteProblem, n: usize, c0: &[&[f64]], flat: &[f64], fixed: &[(usize, f64)]) -> Result<Vec<f64>, FemError> {
    let c1 = split(p, flat);
    let c1r: Vec<&[f64]> = c1.iter().map(Vec::as_slice).collect();
    let mut r = residual_action(p, n, c0, &c1r, false)?.0;
    for &(i, g) in fixed {
        r[i] = flat[i] - g;
    }
    Ok(r)
}

/// Newton's method for the end-of-slab coefficients of slab `n` given those
/// at its start. `guess` defaults to `c0`.
pub fn solve_slab(
    p: &DiscreteProblem,
    cfg: &SolverConfig,
    n: usize,
    c0: &[Vec<f64>],
    guess: Option<&[Vec<f64>]>,
) -> Result<(Vec<Vec<f64>>, SlabReport), FemError> {
    cfg.validate()?;
    if n >= p.slabs.num_slabs() {
        return Err(FemError::Invalid(format!("slab {n} out of range")));
    }
    let c0r: Vec<&[f64]> = c0.iter().map(Vec::as_slice).collect();
    let fixed = constraints(p, p.slabs.slab(n).1);
    let mut x: Vec<f64> = guess.unwrap_or(c0).iter().flatten().copied().collect();
    for &(i, g) in &fixed {
        x[i] = g;
    }
    let mut r = residual(p, n, &c0r, &x, &fixed)?;
    let mut history = vec![inf_norm(&r)];
    let mut it = 0;
    while *history.last().unwrap() > cfg.tol {
        if it == cfg.max_iter {
            return Err(FemError::NoConvergence { slab: n, history });
        }
        it += 1;
        let c1 = split(p, &x);
        let c1r: Vec<&[f64]> = c1.iter().map(Vec::as_slice).collect();
        let mut jac = residual_action(p, n, &c0r, &c1r, true)?.1.unwrap();
        for &(i, _) in &fixed {
            jac.row_mut(i).fill(0.0);
            jac[(i, i)] = 1.0;
        }
        let rhs = nalgebra::DVector::from_iterator(r.len(), r.iter().map(|v| -v));
        let dx = jac.lu().solve(&rhs).ok_or(FemError::SingularJacobian { slab: n, iteration: it })?;
        if dx.iter().any(|v| !v.is_finite()) {
            return Err(FemError::SingularJacobian { slab: n, iteration: it });
        }
        let old = *history.last().unwrap();
        let mut step = 1.0;
        let mut accepted = None;
        let mut last_err = None;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + step * d).collect();
            match residual(p, n, &c0r, &trial, &fixed) {
                Ok(rt) => {
                    let nt = inf_norm(&rt);
                    // Full steps are always taken once the residual is tiny:
                    // the norm is then dominated by roundoff.
                    if nt < old || step == 1.0 && nt <= 10.0 * cfg.tol {
                        accepted = Some((trial, rt, nt));
                        break;
                    }
                }
                Err(e @ FemError::NonPositiveJacobian { .. }) => last_err = Some(e),
                Err(e) => return Err(e),
            }
            step *= cfg.backtrack;
        }
        match accepted {
            Some((xt, rt, nt)) => {
                x = xt;
                r = rt;
                history.push(nt);
            }
            None => {
                if let Some(e) = last_err {
                    return Err(e);
                }
                return Err(FemError::NoConvergence { slab: n, history });
            }
        }
    }
    Ok((split(p, &x), SlabReport { slab: n, iterations: it, residual_history: history }))
}

/// Marches every slab, starting each Newton solve from a linear extrapolation
/// of the two previous knots.
pub fn solve_all(p: &DiscreteProblem, cfg: &SolverConfig) -> Result<Solution, FemError> {
    let mut fields = p.initial_fields();
    let mut reports = Vec::with_capacity(p.slabs.num_slabs());
    for n in 0..p.slabs.num_slabs() {
        let c0: Vec<Vec<f64>> = fields.iter().map(|f| f.knots[n].clone()).collect();
        let guess: Option<Vec<Vec<f64>>> = (n > 0).then(|| {
            fields.iter().map(|f| f.knots[n].iter().zip(&f.knots[n - 1]).map(|(a, b)| 2.0 * a - b).collect()).collect()
        });
        let (c1, rep) = match solve_slab(p, cfg, n, &c0, guess.as_deref()) {
            Err(FemError::NonPositiveJacobian { .. }) if guess.is_some() => solve_slab(p, cfg, n, &c0, None)?,
            r => r?,
        };
        for (f, c) in fields.iter_mut().zip(c1) {
            f.knots.push(c);
        }
        reports.push(rep);
    }
    Ok(Solution { fields, reports })
}

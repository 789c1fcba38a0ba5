use crate::mesh::IntervalRule;
use crate::noether::{first_order_flux, SymmetryGenerator};
use crate::symexpr::{euler_operator, partial, Atom, Compiled, Expr, JetSpace, PointBinding};

use super::assembly::Route;
use super::FemError;

/// Continuous piecewise-polynomial `U(x)` of degree 1 or 2 on sorted nodes.
/// Degree-2 coefficients interleave nodes and element midpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct Field1d {
    pub nodes: Vec<f64>,
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl Field1d {
    pub fn new(nodes: Vec<f64>, degree: usize, coeffs: Vec<f64>) -> Result<Self, FemError> {
        if nodes.len() < 2 || nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FemError::Invalid("1-D nodes must be strictly increasing, at least two".into()));
        }
        if degree != 1 && degree != 2 {
            return Err(FemError::Invalid(format!("1-D degree {degree} not supported")));
        }
        let need = degree * (nodes.len() - 1) + 1;
        if coeffs.len() != need {
            return Err(FemError::Invalid(format!("{} coefficients, expected {need}", coeffs.len())));
        }
        Ok(Field1d { nodes, degree, coeffs })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(nodes: Vec<f64>, degree: usize, f: impl Fn(f64) -> f64) -> Result<Self, FemError> {
        let mut c = Vec::new();
        for (i, w) in nodes.windows(2).enumerate() {
            if i == 0 {
                c.push(f(w[0]));
            }
            if degree == 2 {
                c.push(f(0.5 * (w[0] + w[1])));
            }
            c.push(f(w[1]));
        }
        Self::new(nodes, degree, c)
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    fn dofs(&self, k: usize) -> Vec<usize> {
        (self.degree * k..=self.degree * (k + 1)).collect()
    }

    /// Basis values, first and second derivatives on element `k` at local
    /// coordinate `s ∈ [0, 1]`.
    fn basis(&self, k: usize, s: f64) -> [Vec<f64>; 3] {
        let h = self.nodes[k + 1] - self.nodes[k];
        if self.degree == 1 {
            [vec![1.0 - s, s], vec![-1.0 / h, 1.0 / h], vec![0.0, 0.0]]
        } else {
            [
                vec![(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)],
                vec![(4.0 * s - 3.0) / h, (4.0 - 8.0 * s) / h, (4.0 * s - 1.0) / h],
                vec![4.0 / (h * h), -8.0 / (h * h), 4.0 / (h * h)],
            ]
        }
    }

    /// `(U, U_x, U_xx)` on element `k` at local coordinate `s`.
    pub fn jets(&self, k: usize, s: f64) -> [f64; 3] {
        let b = self.basis(k, s);
        let d = self.dofs(k);
        let dot = |v: &[f64]| v.iter().zip(&d).map(|(x, &i)| x * self.coeffs[i]).sum::<f64>();
        [dot(&b[0]), dot(&b[1]), dot(&b[2])]
    }
}

struct Kernel1d {
    compiled: Compiled,
    params: Vec<f64>,
}

impl Kernel1d {
    fn new(js: &JetSpace, exprs: &[Expr], binding: &PointBinding) -> Result<Self, FemError> {
        let (x, u) = check_space(js)?;
        let mut slots = vec![
            Atom::Jet(js.jet_var(&u, &[])?),
            Atom::Jet(js.jet_var(&u, &[x.as_str()])?),
            Atom::Jet(js.jet_var(&u, &[x.as_str(), x.as_str()])?),
            Atom::Indep(x.as_str().into()),
        ];
        let mut params = Vec::new();
        for p in js.params() {
            slots.push(Atom::Param(p.clone()));
            params.push(binding.get(p).ok_or_else(|| FemError::Invalid(format!("no value for parameter `{p}`")))?);
        }
        Ok(Kernel1d { compiled: Compiled::new(exprs, &slots)?, params })
    }

    fn eval(&self, jets: [f64; 3], x: f64, scratch: &mut Vec<f64>, out: &mut [f64]) {
        let mut inputs = vec![jets[0], jets[1], jets[2], x];
        inputs.extend_from_slice(&self.params);
        self.compiled.eval_into(&inputs, scratch, out);
    }
}

fn check_space(js: &JetSpace) -> Result<(String, String), FemError> {
    if js.independent().len() != 1 || js.dependent().len() != 1 || !js.functions().is_empty() {
        return Err(FemError::Invalid("1-D finite elements need one independent and one dependent variable".into()));
    }
    Ok((js.independent()[0].to_string(), js.dependent()[0].to_string()))
}

fn first_order(l: &Expr) -> Result<(), FemError> {
    if l.max_order() > 1 {
        return Err(FemError::Invalid("1-D finite elements need a first-order Lagrangian".into()));
    }
    Ok(())
}

/// Terms of the 1-D finite-element Noether identity.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NoetherTerms1d {
    /// `∫ E|_U (φ - U_x ξ)`.
    pub volume: f64,
    /// Node jumps of `A = (∂L/∂U_x)(φ - U_x ξ) + L ξ`, left minus right,
    /// with one-sided end values entering as `+A(x_N) - A(x_0)`.
    pub flux: f64,
    pub sum: f64,
    /// Sum of the magnitudes of every contribution, for relative checks.
    pub scale: f64,
}

/// Volume and node-flux terms of the Noether identity of `g` for the field `u`.
pub fn fe_noether_terms_1d(js: &JetSpace, l: &Expr, binding: &PointBinding, u: &Field1d, g: &SymmetryGenerator) -> Result<NoetherTerms1d, FemError> {
    first_order(l)?;
    let (_, dep) = check_space(js)?;
    let (q, a) = first_order_flux(js, l, g)?;
    let e = euler_operator(js, l, &dep)?;
    let k = Kernel1d::new(js, &[q[0].clone(), a[0].clone(), e], binding)?;
    let rule = IntervalRule::with_degree(24)?;
    let mut scratch = Vec::new();
    let mut out = [0.0; 3];
    let mut t = NoetherTerms1d::default();
    for el in 0..u.n_elements() {
        let (x0, x1) = (u.nodes[el], u.nodes[el + 1]);
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            k.eval(u.jets(el, s), x0 + s * (x1 - x0), &mut scratch, &mut out);
            let v = w * (x1 - x0) * out[0] * out[2];
            t.volume += v;
            t.scale += v.abs();
        }
        // The right end of an element enters its node with +, the left end
        // with -: left minus right per node.
        k.eval(u.jets(el, 1.0), x1, &mut scratch, &mut out);
        t.flux += out[1];
        t.scale += out[1].abs();
        k.eval(u.jets(el, 0.0), x0, &mut scratch, &mut out);
        t.flux -= out[1];
        t.scale += out[1].abs();
    }
    t.sum = t.volume + t.flux;
    Ok(t)
}

/// `∫ E|_U (φ - U_x ξ) + Σ_nodes [[(∂L/∂U_x)(φ - U_x ξ) + L ξ]]`. Vanishes up
/// to quadrature error whenever `L` is invariant under `g`; for `L = x u_x`
/// and `ξ = 1` it equals `∫ U_x`.
pub fn fe_noether_residual_1d(js: &JetSpace, l: &Expr, binding: &PointBinding, u: &Field1d, g: &SymmetryGenerator) -> Result<f64, FemError> {
    Ok(fe_noether_terms_1d(js, l, binding, u, g)?.sum)
}

/// Discrete Euler-Lagrange residual of `∫ L(x, U, U_x)` for every basis
/// function, boundary ones included.
pub fn el_residual_1d(js: &JetSpace, l: &Expr, binding: &PointBinding, u: &Field1d, route: Route) -> Result<Vec<f64>, FemError> {
    first_order(l)?;
    let (x, dep) = check_space(js)?;
    let du = Expr::atom(Atom::Jet(js.jet_var(&dep, &[])?));
    let dux = Expr::atom(Atom::Jet(js.jet_var(&dep, &[x.as_str()])?));
    let exprs = vec![partial(js, l, &du)?, partial(js, l, &dux)?, euler_operator(js, l, &dep)?];
    let k = Kernel1d::new(js, &exprs, binding)?;
    let rule = IntervalRule::with_degree(24)?;
    let mut r = vec![0.0; u.coeffs.len()];
    let mut scratch = Vec::new();
    let mut out = [0.0; 3];
    for el in 0..u.n_elements() {
        let (x0, x1) = (u.nodes[el], u.nodes[el + 1]);
        let dofs = u.dofs(el);
        for (&s, &w) in rule.points.iter().zip(&rule.weights) {
            let b = u.basis(el, s);
            k.eval(u.jets(el, s), x0 + s * (x1 - x0), &mut scratch, &mut out);
            for (i, &d) in dofs.iter().enumerate() {
                r[d] += w * (x1 - x0)
                    * match route {
                        Route::ActionVariation => out[0] * b[0][i] + out[1] * b[1][i],
                        Route::EulerLagrange => out[2] * b[0][i],
                    };
            }
        }
        if route == Route::EulerLagrange {
            for (s, sign, d) in [(1.0, 1.0, *dofs.last().unwrap()), (0.0, -1.0, dofs[0])] {
                k.eval(u.jets(el, s), x0 + s * (x1 - x0), &mut scratch, &mut out);
                r[d] += sign * out[1];
            }
        }
    }
    Ok(r)
}

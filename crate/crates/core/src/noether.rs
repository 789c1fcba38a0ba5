//! Prolongation, the infinitesimal criterion of invariance, and Noether
//! currents built from it.

use crate::symexpr::{
    equivalent, euler_operator, partial, random_binding, total_derivative, total_derivative_multi, Atom, Expr,
    JetSpace, JetVar, Sampler, SymError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NoetherError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error("Lagrangian is not invariant under `{generator}`: residual {residual}")]
    NotInvariant { generator: String, residual: Expr },
    #[error("Noether identity fails for `{generator}`: residual {residual}")]
    IdentityFailed { generator: String, residual: Expr },
    #[error("generator does not match the jet space: {0}")]
    Mismatch(String),
}

/// Infinitesimal generator of a one-parameter group acting on the base
/// coordinates: `xi[i]` for each independent variable and `phi[α]` for each
/// dependent variable, in jet-space order.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryGenerator {
    pub name: String,
    pub xi: Vec<Expr>,
    pub phi: Vec<Expr>,
}

impl SymmetryGenerator {
    pub fn new(name: impl Into<String>, xi: Vec<Expr>, phi: Vec<Expr>) -> Self {
        SymmetryGenerator { name: name.into(), xi, phi }
    }

    /// Translation in an independent variable (`a`, `b`, `t`, `x`).
    pub fn translation(js: &JetSpace, indep: &str) -> Result<Self, SymError> {
        let i = position(js.independent(), indep)?;
        let mut xi = vec![Expr::zero(); js.independent().len()];
        xi[i] = Expr::one();
        Ok(Self::new(format!("translation-{indep}"), xi, vec![Expr::zero(); js.dependent().len()]))
    }

    /// Translation of a dependent variable, `u -> u + ε`.
    pub fn shift(js: &JetSpace, dep: &str) -> Result<Self, SymError> {
        let a = position(js.dependent(), dep)?;
        let mut phi = vec![Expr::zero(); js.dependent().len()];
        phi[a] = Expr::one();
        Ok(Self::new(format!("shift-{dep}"), vec![Expr::zero(); js.independent().len()], phi))
    }

    /// Rotation of the graph `(x, u(x))` in the plane: `ξ = -u`, `φ = x`.
    pub fn graph_rotation(js: &JetSpace) -> Result<Self, SymError> {
        if js.independent().len() != 1 || js.dependent().len() != 1 {
            return Err(SymError::InvalidJetSpace("graph rotation needs one independent and one dependent variable".into()));
        }
        let x = Expr::indep(&js.independent()[0]);
        let u = js.jet(&js.dependent()[0], "")?;
        Ok(Self::new("rotation", vec![-u], vec![x]))
    }

    /// Simultaneous rotation of each listed pair of dependent variables,
    /// e.g. `[("x","y"), ("u","v")]`.
    pub fn rotation(js: &JetSpace, pairs: &[(&str, &str)]) -> Result<Self, SymError> {
        let mut phi = vec![Expr::zero(); js.dependent().len()];
        for (p, q) in pairs {
            let (i, j) = (position(js.dependent(), p)?, position(js.dependent(), q)?);
            phi[i] = -js.jet(q, "")?;
            phi[j] = js.jet(p, "")?;
        }
        Ok(Self::new("rotation", vec![Expr::zero(); js.independent().len()], phi))
    }

    /// Particle relabelling generated by a stream function `psi(a, b)`:
    /// `ξ^a = ψ_b`, `ξ^b = -ψ_a`, everything else fixed.
    pub fn relabelling(js: &JetSpace, psi: &Expr) -> Result<Self, SymError> {
        let (ia, ib) = (position(js.independent(), "a")?, position(js.independent(), "b")?);
        let mut xi = vec![Expr::zero(); js.independent().len()];
        xi[ia] = total_derivative(js, psi, "b")?;
        xi[ib] = -total_derivative(js, psi, "a")?;
        Ok(Self::new("relabelling", xi, vec![Expr::zero(); js.dependent().len()]))
    }

    fn check(&self, js: &JetSpace) -> Result<(), NoetherError> {
        if self.xi.len() != js.independent().len() || self.phi.len() != js.dependent().len() {
            return Err(NoetherError::Mismatch(format!(
                "`{}` has {} + {} infinitesimals, jet space has {} + {} variables",
                self.name,
                self.xi.len(),
                self.phi.len(),
                js.independent().len(),
                js.dependent().len()
            )));
        }
        for e in self.xi.iter().chain(&self.phi) {
            if e.max_order() > 0 {
                return Err(NoetherError::Mismatch(format!("infinitesimal `{e}` depends on derivatives")));
            }
        }
        Ok(())
    }

    /// Characteristic `Q^α = φ^α - Σ_i u^α_i ξ^i`.
    pub fn characteristics(&self, js: &JetSpace) -> Result<Vec<Expr>, NoetherError> {
        self.check(js)?;
        let mut out = Vec::with_capacity(self.phi.len());
        for (dep, phi) in js.dependent().iter().zip(&self.phi) {
            let mut q = phi.clone();
            for (s, xi) in js.independent().iter().zip(&self.xi) {
                if !xi.is_zero() {
                    q = &q - &(&Expr::atom(Atom::Jet(js.jet_var(dep, &[s])?)) * xi);
                }
            }
            out.push(q);
        }
        Ok(out)
    }
}

fn position(names: &[crate::symexpr::Name], s: &str) -> Result<usize, SymError> {
    names.iter().position(|n| &**n == s).ok_or_else(|| SymError::UnknownSymbol(s.to_string()))
}

/// Prolonged infinitesimal on a derivative coordinate:
/// `φ_[J,j] = D_j φ_[J] - Σ_k u_{J,k} D_j ξ^k`.
pub fn prolong(js: &JetSpace, g: &SymmetryGenerator, c: &JetVar) -> Result<Expr, NoetherError> {
    g.check(js)?;
    if c.order() == 0 || c.order() > 2 {
        return Err(SymError::Unsupported(format!("prolongation to order {}", c.order())).into());
    }
    let a = position(js.dependent(), &c.dep)?;
    let mut cur = JetVar { dep: c.dep.clone(), deriv: Vec::new() };
    let mut val = g.phi[a].clone();
    for s in &c.deriv {
        let mut next = total_derivative(js, &val, s)?;
        for (k, xi) in js.independent().iter().zip(&g.xi) {
            let dxi = total_derivative(js, xi, s)?;
            if !dxi.is_zero() {
                let ujk = Expr::atom(Atom::Jet(js.extend(&cur, k)?));
                next = &next - &(&ujk * &dxi);
            }
        }
        val = next;
        cur = js.extend(&cur, s)?;
    }
    Ok(val)
}

/// Outcome of the infinitesimal criterion.
#[derive(Clone, Debug)]
pub struct InvarianceReport {
    pub residual: Expr,
    pub is_invariant: bool,
    /// Largest `|residual|` over the random bindings used for the check.
    pub max_abs: f64,
}

const TRIALS: usize = 100;

/// `Σ ∂L/∂s_i ξ^i + Σ ∂L/∂u^α φ^α + Σ ∂L/∂u^α_J φ^α_[J] + L Σ D_i ξ^i`.
pub fn criterion_residual(js: &JetSpace, l: &Expr, g: &SymmetryGenerator) -> Result<Expr, NoetherError> {
    g.check(js)?;
    let order = l.max_order();
    if order > 2 || (order == 2 && js.independent().len() > 1) {
        return Err(SymError::Unsupported(format!("invariance criterion for a Lagrangian of order {order}")).into());
    }
    let mut r = Expr::zero();
    let mut div = Expr::zero();
    for (s, xi) in js.independent().iter().zip(&g.xi) {
        if xi.is_zero() {
            continue;
        }
        r = &r + &(&partial(js, l, &Expr::indep(s))? * xi);
        div = &div + &total_derivative(js, xi, s)?;
    }
    for (dep, phi) in js.dependent().iter().zip(&g.phi) {
        if !phi.is_zero() {
            r = &r + &(&partial(js, l, &js.jet(dep, "")?)? * phi);
        }
    }
    for j in l.jet_vars() {
        if j.order() == 0 {
            continue;
        }
        let dl = partial(js, l, &Expr::atom(Atom::Jet(j.clone())))?;
        if !dl.is_zero() {
            r = &r + &(&dl * &prolong(js, g, &j)?);
        }
    }
    Ok(&r + &(l * &div))
}

fn max_abs(e: &Expr, trials: usize) -> Result<f64, SymError> {
    if e.is_zero() {
        return Ok(0.0);
    }
    let mut s = Sampler::new(0x1_0e7e);
    let mut m: f64 = 0.0;
    for _ in 0..trials {
        let b = random_binding(&[e], &mut s, 100)?;
        m = m.max(crate::symexpr::evaluate(e, &b)?.abs());
    }
    Ok(m)
}

pub fn infinitesimal_criterion(js: &JetSpace, l: &Expr, g: &SymmetryGenerator) -> Result<InvarianceReport, NoetherError> {
    let residual = criterion_residual(js, l, g)?;
    let is_invariant = equivalent(&residual, &Expr::zero(), TRIALS)?;
    let max_abs = max_abs(&residual, TRIALS)?;
    Ok(InvarianceReport { residual, is_invariant, max_abs })
}

/// Characteristics together with the components `A_i` of the conserved
/// current, one per independent variable in jet-space order.
#[derive(Clone, Debug)]
pub struct NoetherCurrent {
    pub generator: String,
    pub characteristics: Vec<Expr>,
    pub components: Vec<Expr>,
    independent: Vec<String>,
}

impl NoetherCurrent {
    pub fn component(&self, s: &str) -> Option<&Expr> {
        self.independent.iter().position(|n| n == s).map(|i| &self.components[i])
    }

    /// Conserved density `A_t`.
    pub fn density(&self) -> Option<&Expr> {
        self.component("t")
    }

    /// The defining identity `Σ Q^α E^α(L) + Σ_i D_i A_i`.
    pub fn identity_residual(&self, js: &JetSpace, l: &Expr) -> Result<Expr, SymError> {
        let mut r = Expr::zero();
        for (dep, q) in js.dependent().iter().zip(&self.characteristics) {
            if !q.is_zero() {
                r = &r + &(q * &euler_operator(js, l, dep)?);
            }
        }
        for (s, a) in js.independent().iter().zip(&self.components) {
            r = &r + &total_derivative(js, a, s)?;
        }
        Ok(r)
    }
}

fn require_invariant(js: &JetSpace, l: &Expr, g: &SymmetryGenerator) -> Result<(), NoetherError> {
    let residual = criterion_residual(js, l, g)?;
    if equivalent(&residual, &Expr::zero(), TRIALS)? {
        Ok(())
    } else {
        Err(NoetherError::NotInvariant { generator: g.name.clone(), residual })
    }
}

fn finish(js: &JetSpace, l: &Expr, g: &SymmetryGenerator, q: Vec<Expr>, a: Vec<Expr>) -> Result<NoetherCurrent, NoetherError> {
    let cur = NoetherCurrent {
        generator: g.name.clone(),
        characteristics: q,
        components: a,
        independent: js.independent().iter().map(|s| s.to_string()).collect(),
    };
    let residual = cur.identity_residual(js, l)?;
    if !equivalent(&residual, &Expr::zero(), TRIALS)? {
        return Err(NoetherError::IdentityFailed { generator: g.name.clone(), residual });
    }
    Ok(cur)
}

/// `A_i = L ξ^i + Σ_α ∂L/∂u^α_i Q^α` for a first-order Lagrangian in any
/// number of independent variables.
pub fn noether_current_first_order(js: &JetSpace, l: &Expr, g: &SymmetryGenerator) -> Result<NoetherCurrent, NoetherError> {
    if l.max_order() > 1 {
        return Err(SymError::Unsupported("first-order current of a higher-order Lagrangian".into()).into());
    }
    require_invariant(js, l, g)?;
    let (q, comps) = first_order_flux(js, l, g)?;
    finish(js, l, g, q, comps)
}

/// Characteristics and current components `A_i = L ξ^i + Σ_α ∂L/∂u^α_i Q^α`
/// without checking invariance. For a non-invariant Lagrangian the identity
/// picks up the explicit variation of `L`.
pub fn first_order_flux(js: &JetSpace, l: &Expr, g: &SymmetryGenerator) -> Result<(Vec<Expr>, Vec<Expr>), NoetherError> {
    let q = g.characteristics(js)?;
    let mut comps = Vec::with_capacity(js.independent().len());
    for (s, xi) in js.independent().iter().zip(&g.xi) {
        let mut a = l * xi;
        for (dep, qa) in js.dependent().iter().zip(&q) {
            if qa.is_zero() {
                continue;
            }
            let d = partial(js, l, &Expr::atom(Atom::Jet(js.jet_var(dep, &[s])?)))?;
            a = &a + &(&d * qa);
        }
        comps.push(a);
    }
    Ok((q, comps))
}

/// `A_x = L ξ + L_{u_x} Q` for `L(x, u, u_x)`.
pub fn noether_current_1d_first(js: &JetSpace, l: &Expr, g: &SymmetryGenerator) -> Result<NoetherCurrent, NoetherError> {
    if js.independent().len() != 1 || js.dependent().len() != 1 {
        return Err(NoetherError::Mismatch("expected one independent and one dependent variable".into()));
    }
    noether_current_first_order(js, l, g)
}

/// `A_x = L ξ + L_{u_x} Q + L_{u_xx} D_x Q - Q D_x L_{u_xx}` for `L(x, u, u_x, u_xx)`.
pub fn noether_current_1d_second(js: &JetSpace, l: &Expr, g: &SymmetryGenerator) -> Result<NoetherCurrent, NoetherError> {
    if js.independent().len() != 1 || js.dependent().len() != 1 {
        return Err(NoetherError::Mismatch("expected one independent and one dependent variable".into()));
    }
    require_invariant(js, l, g)?;
    let (x, u) = (js.independent()[0].to_string(), js.dependent()[0].to_string());
    let q = g.characteristics(js)?;
    let ux = js.jet(&u, &x)?;
    let uxx = js.jet(&u, &format!("{x}{x}"))?;
    let lux = partial(js, l, &ux)?;
    let luxx = partial(js, l, &uxx)?;
    let a = &(&(l * &g.xi[0]) + &(&lux * &q[0])) + &(&(&luxx * &total_derivative(js, &q[0], &x)?) - &(&q[0] * &total_derivative(js, &luxx, &x)?));
    finish(js, l, g, q, vec![a])
}

/// Current for the label-time case `(a, b, t) -> (x, y, ...)`.
pub fn noether_current_swe(js: &JetSpace, l: &Expr, g: &SymmetryGenerator) -> Result<NoetherCurrent, NoetherError> {
    for s in ["a", "b", "t"] {
        if !js.is_independent(s) {
            return Err(NoetherError::Mismatch(format!("missing independent variable `{s}`")));
        }
    }
    noether_current_first_order(js, l, g)
}

/// Momentum density `M_s = Σ_α u^α_s ∂L/∂u^α_t`; the `s`-translation current
/// has density `A_t = -M_s`.
pub fn momentum_density(js: &JetSpace, l: &Expr, s: &str) -> Result<Expr, SymError> {
    let mut m = Expr::zero();
    for dep in js.dependent() {
        let lt = partial(js, l, &js.jet(dep, "t")?)?;
        if !lt.is_zero() {
            m = &m + &(&js.jet(dep, s)? * &lt);
        }
    }
    Ok(m)
}

/// Potential-vorticity density from cross-differentiating the two label
/// momenta: `D_b M_a - D_a M_b`. Every dependent variable with a time
/// derivative in `L` contributes to the momenta.
pub fn pv_from_momenta(js: &JetSpace, l: &Expr) -> Result<Expr, NoetherError> {
    for s in ["a", "b"] {
        let g = SymmetryGenerator::translation(js, s)?;
        require_invariant(js, l, &g)?;
    }
    let ma = momentum_density(js, l, "a")?;
    let mb = momentum_density(js, l, "b")?;
    Ok(&total_derivative_multi(js, &ma, &["b"])? - &total_derivative_multi(js, &mb, &["a"])?)
}

use crate::noether::{first_order_flux, SymmetryGenerator};
use crate::swmodels::LagrangianSpec;
use crate::symexpr::{euler_operator, partial, total_derivative, Atom, Compiled, Expr, JetSpace};

use super::FemError;

/// Jet multi-indices evaluated at every point, in slot order.
pub(crate) const JETS: [&[&str]; 10] =
    [&[], &["a"], &["b"], &["t"], &["a", "a"], &["a", "b"], &["b", "b"], &["a", "t"], &["b", "t"], &["t", "t"]];
pub(crate) const NJ: usize = JETS.len();
pub(crate) const J_V: usize = 0;
pub(crate) const J_A: usize = 1;
pub(crate) const J_B: usize = 2;
pub(crate) const J_T: usize = 3;
pub(crate) const J_AA: usize = 4;
pub(crate) const J_AB: usize = 5;
pub(crate) const J_BB: usize = 6;
pub(crate) const J_AT: usize = 7;
pub(crate) const J_BT: usize = 8;

/// Input layout shared by every kernel: jets per dependent variable, then
/// `a, b, t`, the parameters, and `φ, φ_a, φ_b` of a stream function.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Layout {
    pub ndep: usize,
    pub nparams: usize,
}

impl Layout {
    pub fn jet(&self, w: usize, j: usize) -> usize {
        w * NJ + j
    }
    pub fn indep(&self, i: usize) -> usize {
        self.ndep * NJ + i
    }
    pub fn param(&self, p: usize) -> usize {
        self.ndep * NJ + 3 + p
    }
    pub fn phi(&self, k: usize) -> usize {
        self.ndep * NJ + 3 + self.nparams + k
    }
    pub fn len(&self) -> usize {
        self.ndep * NJ + 6 + self.nparams
    }
}

/// Evaluators for `L`, its first and second partials in the first-order jets,
/// and the Euler-Lagrange expressions.
#[derive(Clone, Debug)]
pub struct Kernels {
    pub(crate) js: JetSpace,
    pub(crate) layout: Layout,
    slots: Vec<Atom>,
    /// `[L, ∂L/∂w_d for w, d ∈ {·, a, b, t}]`.
    pub(crate) weak: Compiled,
    /// Non-zero second partials, upper triangle over `p = 4w + d`.
    pub(crate) hess: Compiled,
    pub(crate) hess_pairs: Vec<(usize, usize)>,
    /// `E^w` for each dependent variable.
    pub(crate) strong: Compiled,
}

/// Characteristics and current for one generator, compiled on the shared
/// layout: `[Q^w…, A^a, A^b, A^t, D_t A^t]`.
#[derive(Clone, Debug)]
pub struct CurrentKernel {
    pub name: String,
    pub(crate) compiled: Compiled,
}

fn stream_space(js: &JetSpace) -> JetSpace {
    js.clone().with_function("phi", &["a", "b"])
}

impl Kernels {
    pub fn new(spec: &LagrangianSpec) -> Result<Self, FemError> {
        let base = &spec.js;
        for s in ["a", "b", "t"] {
            if !base.is_independent(s) || base.independent().len() != 3 {
                return Err(FemError::Invalid("finite elements need independent variables (a, b, t)".into()));
            }
        }
        if !base.functions().is_empty() {
            return Err(FemError::Invalid("finite elements need a concrete gauge, not opaque gauge functions".into()));
        }
        let js = stream_space(base);
        let deps: Vec<String> = js.dependent().iter().map(|d| d.to_string()).collect();
        let layout = Layout { ndep: deps.len(), nparams: js.params().len() };
        let mut slots = Vec::with_capacity(layout.len());
        for w in &deps {
            for j in JETS {
                slots.push(Atom::Jet(js.jet_var(w, j)?));
            }
        }
        for s in ["a", "b", "t"] {
            slots.push(Atom::Indep(s.into()));
        }
        for p in js.params() {
            slots.push(Atom::Param(p.clone()));
        }
        let ab = vec![Expr::indep("a"), Expr::indep("b")];
        for key in ["phi", "phi_a", "phi_b"] {
            let e = js.apply_partial(key, ab.clone())?;
            slots.push(e.as_atom().cloned().ok_or_else(|| FemError::Invalid("stream function slot".into()))?);
        }

        let l = &spec.lagrangian;
        let mut first = vec![l.clone()];
        for w in &deps {
            for j in &JETS[..4] {
                first.push(partial(&js, l, &Expr::atom(Atom::Jet(js.jet_var(w, j)?)))?);
            }
        }
        let mut hess_exprs = Vec::new();
        let mut hess_pairs = Vec::new();
        let n1 = 4 * deps.len();
        for p in 0..n1 {
            for q in p..n1 {
                let (w, j) = (q / 4, q % 4);
                let h = partial(&js, &first[1 + p], &Expr::atom(Atom::Jet(js.jet_var(&deps[w], JETS[j])?)))?;
                if !h.is_zero() {
                    hess_pairs.push((p, q));
                    hess_exprs.push(h);
                }
            }
        }
        let strong: Vec<Expr> = deps.iter().map(|w| euler_operator(&js, l, w)).collect::<Result<_, _>>()?;
        Ok(Kernels {
            weak: Compiled::new(&first, &slots)?,
            hess: Compiled::new(&hess_exprs, &slots)?,
            hess_pairs,
            strong: Compiled::new(&strong, &slots)?,
            js,
            layout,
            slots,
        })
    }

    /// Jet space of the kernels: the model's, plus the stream function `phi(a, b)`.
    pub fn jet_space(&self) -> &JetSpace {
        &self.js
    }

    pub fn ndep(&self) -> usize {
        self.layout.ndep
    }

    /// Compiles the characteristics and current of `g`, whose infinitesimals
    /// may involve `phi(a, b)`.
    pub fn current(&self, spec: &LagrangianSpec, g: &SymmetryGenerator) -> Result<CurrentKernel, FemError> {
        let (q, comps) = first_order_flux(&self.js, &spec.lagrangian, g)?;
        let mut out = q;
        out.extend(comps.iter().cloned());
        out.push(total_derivative(&self.js, &comps[2], "t")?);
        Ok(CurrentKernel { name: g.name.clone(), compiled: Compiled::new(&out, &self.slots)? })
    }
}

/// Named generators available to the finite-element diagnostics.
pub fn fe_generator(kernels: &Kernels, spec: &LagrangianSpec, name: &str) -> Result<SymmetryGenerator, FemError> {
    let js = &kernels.js;
    Ok(match name {
        "energy" => named(SymmetryGenerator::translation(js, "t")?, "energy"),
        "momentum-a" => named(SymmetryGenerator::translation(js, "a")?, "momentum-a"),
        "momentum-b" => named(SymmetryGenerator::translation(js, "b")?, "momentum-b"),
        "angular" => {
            let pairs: Vec<(&str, &str)> = match spec.model {
                crate::swmodels::Model::Salmon => vec![("x", "y"), ("u", "v")],
                crate::swmodels::Model::Sg => vec![("x", "y"), ("u_g", "v_g")],
                crate::swmodels::Model::Custom => vec![("x", "y")],
            };
            named(SymmetryGenerator::rotation(js, &pairs)?, "angular")
        }
        "pv" => {
            let psi = js.apply("phi", vec![Expr::indep("a"), Expr::indep("b")])?;
            named(SymmetryGenerator::relabelling(js, &psi)?, "pv")
        }
        other => return Err(FemError::Invalid(format!("unknown symmetry `{other}`"))),
    })
}

fn named(mut g: SymmetryGenerator, n: &str) -> SymmetryGenerator {
    g.name = n.to_string();
    g
}

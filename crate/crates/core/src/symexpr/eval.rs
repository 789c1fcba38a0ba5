use std::collections::{BTreeSet, HashMap};

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::expr::{Atom, Expr, Q};
use super::SymError;

/// Values for leaf atoms, keyed by their binding key (`x_at`, `f`, `P_x`, ...).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointBinding {
    values: HashMap<String, f64>,
}

impl PointBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, v: f64) -> &mut Self {
        self.values.insert(key.into(), v);
        self
    }

    pub fn with(mut self, key: impl Into<String>, v: f64) -> Self {
        self.set(key, v);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl<K: Into<String>> FromIterator<(K, f64)> for PointBinding {
    fn from_iter<I: IntoIterator<Item = (K, f64)>>(iter: I) -> Self {
        PointBinding { values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect() }
    }
}

fn q_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug)]
enum EvalFail {
    Err(SymError),
    /// Near-singular denominator or a fractional power of a negative number.
    Singular,
}

fn power(base: f64, e: &Q, guard: f64, subtree: &dyn Fn() -> String) -> Result<f64, EvalFail> {
    if *e.denom() == 1 {
        let n = *e.numer();
        if n < 0 {
            if base == 0.0 {
                return Err(EvalFail::Err(SymError::DivisionByZero { subtree: subtree() }));
            }
            if base.abs() < guard {
                return Err(EvalFail::Singular);
            }
        }
        Ok(base.powi(n as i32))
    } else {
        if base < 0.0 || (base == 0.0 && *e.numer() < 0) {
            if guard > 0.0 || base < 0.0 {
                return Err(EvalFail::Singular);
            }
            return Err(EvalFail::Err(SymError::DivisionByZero { subtree: subtree() }));
        }
        if *e.numer() < 0 && base < guard {
            return Err(EvalFail::Singular);
        }
        Ok(base.powf(q_f64(e)))
    }
}

fn eval_guarded(e: &Expr, b: &PointBinding, guard: f64) -> Result<f64, EvalFail> {
    let mut total = 0.0;
    for (m, c) in e.terms() {
        let mut term = q_f64(c);
        for (a, ex) in m.factors() {
            let base = match a {
                Atom::Base(inner) => eval_guarded(inner, b, guard)?,
                leaf => {
                    let key = leaf.key();
                    b.get(&key).ok_or(EvalFail::Err(SymError::Unbound(key)))?
                }
            };
            term *= power(base, ex, guard, &|| a.to_string())?;
        }
        total += term;
    }
    Ok(total)
}

/// Evaluate in IEEE double precision.
pub fn evaluate(e: &Expr, b: &PointBinding) -> Result<f64, SymError> {
    match eval_guarded(e, b, 0.0) {
        Ok(v) => Ok(v),
        Err(EvalFail::Err(err)) => Err(err),
        Err(EvalFail::Singular) => Ok(f64::NAN),
    }
}

/// Deterministic random bindings on `[-2, 2]`.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn binding<'a>(&mut self, leaves: impl IntoIterator<Item = &'a Atom>) -> PointBinding {
        leaves.into_iter().map(|a| (a.key(), self.uniform(-2.0, 2.0))).collect()
    }
}

/// A random binding for every leaf of `exprs`, redrawn until every
/// denominator has magnitude at least `0.1`.
pub fn random_binding(exprs: &[&Expr], sampler: &mut Sampler, max_draws: usize) -> Result<PointBinding, SymError> {
    let leaves: BTreeSet<Atom> = exprs.iter().flat_map(|e| e.leaves()).collect();
    for _ in 0..max_draws {
        let b = sampler.binding(&leaves);
        let mut ok = true;
        for e in exprs {
            match eval_guarded(e, &b, 0.1) {
                Ok(v) if v.is_finite() => {}
                Ok(_) | Err(EvalFail::Singular) => {
                    ok = false;
                    break;
                }
                Err(EvalFail::Err(err)) => return Err(err),
            }
        }
        if ok {
            return Ok(b);
        }
    }
    Err(SymError::PersistentSingularity { draws: max_draws })
}

/// Semantic equality: canonical forms agree, or values agree to
/// `1e-9 * (1 + |e1|)` at `trials` random non-singular bindings.
pub fn equivalent(e1: &Expr, e2: &Expr, trials: usize) -> Result<bool, SymError> {
    let diff = e1 - e2;
    if diff.is_zero() {
        return Ok(true);
    }
    let mut sampler = Sampler::new(0x5eed_0001);
    let leaves: BTreeSet<Atom> = e1.leaves().into_iter().chain(e2.leaves()).collect();
    let mut accepted = 0;
    for _ in 0..10 * trials.max(1) {
        let b = sampler.binding(&leaves);
        let v1 = eval_guarded(e1, &b, 0.1);
        let v2 = eval_guarded(e2, &b, 0.1);
        match (v1, v2) {
            (Ok(a), Ok(c)) if a.is_finite() && c.is_finite() => {
                if (a - c).abs() > 1e-9 * (1.0 + a.abs()) {
                    return Ok(false);
                }
                accepted += 1;
                if accepted >= trials {
                    return Ok(true);
                }
            }
            (Err(EvalFail::Err(err)), _) | (_, Err(EvalFail::Err(err))) => return Err(err),
            _ => {}
        }
    }
    Err(SymError::PersistentSingularity { draws: 10 * trials.max(1) })
}

#[derive(Clone, Debug)]
enum Node {
    Input(usize),
    Poly(Vec<(f64, Vec<(usize, Pw)>)>),
}

#[derive(Clone, Copy, Debug)]
enum Pw {
    I(i32),
    F(f64),
}

/// Straight-line evaluator for a batch of expressions over a fixed list of
/// input slots. Shared subexpressions (such as `1/Δ`) are evaluated once.
#[derive(Clone, Debug)]
pub struct Compiled {
    nodes: Vec<Node>,
    outputs: Vec<usize>,
}

impl Compiled {
    /// `slots[i]` is the leaf bound to `inputs[i]` at evaluation time.
    pub fn new(exprs: &[Expr], slots: &[Atom]) -> Result<Self, SymError> {
        let mut b = Builder { nodes: Vec::new(), bases: HashMap::new(), slots };
        for (i, _) in slots.iter().enumerate() {
            b.nodes.push(Node::Input(i));
        }
        let outputs = exprs.iter().map(|e| b.compile(e)).collect::<Result<_, _>>()?;
        Ok(Compiled { nodes: b.nodes, outputs })
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Scratch length required by [`Compiled::eval_into`].
    pub fn scratch_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn eval_into(&self, inputs: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) {
        scratch.clear();
        scratch.resize(self.nodes.len(), 0.0);
        for (k, n) in self.nodes.iter().enumerate() {
            scratch[k] = match n {
                Node::Input(i) => inputs[*i],
                Node::Poly(terms) => {
                    let mut s = 0.0;
                    for (c, fs) in terms {
                        let mut t = *c;
                        for (idx, p) in fs {
                            let v = scratch[*idx];
                            t *= match p {
                                Pw::I(1) => v,
                                Pw::I(2) => v * v,
                                Pw::I(n) => v.powi(*n),
                                Pw::F(x) => v.powf(*x),
                            };
                        }
                        s += t;
                    }
                    s
                }
            };
        }
        for (o, &idx) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[idx];
        }
    }

    pub fn eval(&self, inputs: &[f64]) -> Vec<f64> {
        let mut scratch = Vec::new();
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(inputs, &mut scratch, &mut out);
        out
    }
}

struct Builder<'a> {
    nodes: Vec<Node>,
    bases: HashMap<Expr, usize>,
    slots: &'a [Atom],
}

impl Builder<'_> {
    fn compile(&mut self, e: &Expr) -> Result<usize, SymError> {
        if let Some(&k) = self.bases.get(e) {
            return Ok(k);
        }
        let mut terms = Vec::with_capacity(e.num_terms());
        for (m, c) in e.terms() {
            let mut fs = Vec::with_capacity(m.factors().len());
            for (a, ex) in m.factors() {
                let idx = match a {
                    Atom::Base(inner) => self.compile(inner)?,
                    leaf => self.slots.iter().position(|s| s == leaf).ok_or_else(|| SymError::Unbound(leaf.key()))?,
                };
                let p = if *ex.denom() == 1 { Pw::I(*ex.numer() as i32) } else { Pw::F(q_f64(ex)) };
                fs.push((idx, p));
            }
            terms.push((q_f64(c), fs));
        }
        if terms.is_empty() {
            terms.push((0.0, Vec::new()));
        }
        // a bare input needs no node of its own
        if let [(c, fs)] = terms.as_slice() {
            if *c == 1.0 && fs.len() == 1 && matches!(fs[0].1, Pw::I(1)) {
                return Ok(fs[0].0);
            }
        }
        self.nodes.push(Node::Poly(terms));
        let k = self.nodes.len() - 1;
        self.bases.insert(e.clone(), k);
        Ok(k)
    }
}

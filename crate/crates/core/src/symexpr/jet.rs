use std::sync::Arc;

use super::expr::{Atom, Expr, FuncApp, JetVar, Name};
use super::SymError;

/// Highest derivative order any derived quantity may reach. Lagrangians are
/// at most second order; Noether identities of 1-D second-order Lagrangians
/// reach `u_xxxx`.
pub const MAX_DERIVED_ORDER: usize = 4;

/// Declaration of an opaque parameter function, e.g. `P(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuncDecl {
    pub name: Name,
    pub formals: Vec<Name>,
}

/// Coordinates of a jet space: independent variables, dependent variables
/// and the order of the Lagrangians that live on it. Also carries the
/// numeric parameters (`f`, `g`, ...) and opaque function declarations
/// expressions may reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetSpace {
    independent: Vec<Name>,
    dependent: Vec<Name>,
    max_order: usize,
    params: Vec<Name>,
    functions: Vec<FuncDecl>,
}

impl JetSpace {
    pub fn new(independent: &[&str], dependent: &[&str], max_order: usize) -> Result<Self, SymError> {
        if !(1..=2).contains(&max_order) {
            return Err(SymError::InvalidJetSpace(format!("max_order must be 1 or 2, got {max_order}")));
        }
        let mut seen = std::collections::HashSet::new();
        for n in independent.iter().chain(dependent) {
            if !seen.insert(*n) {
                return Err(SymError::InvalidJetSpace(format!("duplicate symbol `{n}`")));
            }
            if n.is_empty() || !n.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(SymError::InvalidJetSpace(format!("bad symbol name `{n}`")));
            }
        }
        for n in independent {
            if n.chars().count() != 1 {
                return Err(SymError::InvalidJetSpace(format!(
                    "independent variable names must be a single letter, got `{n}`"
                )));
            }
        }
        Ok(JetSpace {
            independent: independent.iter().map(|s| Arc::from(*s)).collect(),
            dependent: dependent.iter().map(|s| Arc::from(*s)).collect(),
            max_order,
            params: Vec::new(),
            functions: Vec::new(),
        })
    }

    pub fn with_params(mut self, params: &[&str]) -> Self {
        for p in params {
            if !self.params.iter().any(|q| &**q == *p) {
                self.params.push(Arc::from(*p));
            }
        }
        self
    }

    pub fn with_function(mut self, name: &str, formals: &[&str]) -> Self {
        self.functions.push(FuncDecl { name: name.into(), formals: formals.iter().map(|s| Arc::from(*s)).collect() });
        self
    }

    pub fn independent(&self) -> &[Name] {
        &self.independent
    }

    pub fn dependent(&self) -> &[Name] {
        &self.dependent
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn params(&self) -> &[Name] {
        &self.params
    }

    pub fn functions(&self) -> &[FuncDecl] {
        &self.functions
    }

    fn indep_index(&self, s: &str) -> Option<usize> {
        self.independent.iter().position(|n| &**n == s)
    }

    pub fn is_independent(&self, s: &str) -> bool {
        self.indep_index(s).is_some()
    }

    pub fn is_dependent(&self, s: &str) -> bool {
        self.dependent.iter().any(|n| &**n == s)
    }

    pub fn is_param(&self, s: &str) -> bool {
        self.params.iter().any(|n| &**n == s)
    }

    fn dep_name(&self, s: &str) -> Result<Name, SymError> {
        self.dependent
            .iter()
            .find(|n| &***n == s)
            .cloned()
            .ok_or_else(|| SymError::UnknownSymbol(s.to_string()))
    }

    fn sort_deriv(&self, deriv: &mut [Name]) {
        deriv.sort_by_key(|d| self.indep_index(d).unwrap_or(usize::MAX));
    }

    /// Jet coordinate `dep` differentiated once by each entry of `by`.
    pub fn jet_var(&self, dep: &str, by: &[&str]) -> Result<JetVar, SymError> {
        let dep = self.dep_name(dep)?;
        let mut deriv = Vec::with_capacity(by.len());
        for b in by {
            let i = self.indep_index(b).ok_or_else(|| SymError::UnknownSymbol(b.to_string()))?;
            deriv.push(self.independent[i].clone());
        }
        if deriv.len() > MAX_DERIVED_ORDER {
            return Err(SymError::OrderOverflow { order: deriv.len(), max: MAX_DERIVED_ORDER });
        }
        self.sort_deriv(&mut deriv);
        Ok(JetVar { dep, deriv })
    }

    /// Convenience: `jet("x", "at")` is `x_at`; the empty string gives `x`.
    pub fn jet(&self, dep: &str, by: &str) -> Result<Expr, SymError> {
        let names: Vec<String> = by.chars().map(|c| c.to_string()).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Ok(Expr::atom(Atom::Jet(self.jet_var(dep, &refs)?)))
    }

    pub fn var(&self, name: &str) -> Result<Expr, SymError> {
        if self.is_independent(name) {
            Ok(Expr::indep(name))
        } else if self.is_param(name) {
            Ok(Expr::param(name))
        } else {
            self.resolve(name)
        }
    }

    /// The jet coordinate obtained by differentiating `j` once more by `s`.
    pub fn extend(&self, j: &JetVar, s: &str) -> Result<JetVar, SymError> {
        let i = self.indep_index(s).ok_or_else(|| SymError::UnknownSymbol(s.to_string()))?;
        if j.order() + 1 > MAX_DERIVED_ORDER {
            return Err(SymError::OrderOverflow { order: j.order() + 1, max: MAX_DERIVED_ORDER });
        }
        let mut deriv = j.deriv.clone();
        deriv.push(self.independent[i].clone());
        self.sort_deriv(&mut deriv);
        Ok(JetVar { dep: j.dep.clone(), deriv })
    }

    /// Apply an opaque function to arguments.
    pub fn apply(&self, name: &str, args: Vec<Expr>) -> Result<Expr, SymError> {
        let decl = self
            .functions
            .iter()
            .find(|d| &*d.name == name)
            .ok_or_else(|| SymError::UnknownSymbol(name.to_string()))?;
        if decl.formals.len() != args.len() {
            return Err(SymError::Arity { name: name.to_string(), expected: decl.formals.len(), got: args.len() });
        }
        Ok(Expr::func(FuncApp {
            name: decl.name.clone(),
            formals: decl.formals.clone(),
            derivs: vec![0; args.len()],
            args,
        }))
    }

    /// Apply a formal partial such as `P_x` directly, given its declared name
    /// with a derivative suffix.
    pub fn apply_partial(&self, key: &str, args: Vec<Expr>) -> Result<Expr, SymError> {
        for decl in &self.functions {
            if &*decl.name == key {
                return self.apply(key, args);
            }
            let Some(rest) = key.strip_prefix(&*decl.name).and_then(|r| r.strip_prefix('_')) else {
                continue;
            };
            if let Some(derivs) = split_formals(rest, &decl.formals) {
                if decl.formals.len() != args.len() {
                    return Err(SymError::Arity {
                        name: key.to_string(),
                        expected: decl.formals.len(),
                        got: args.len(),
                    });
                }
                return Ok(Expr::func(FuncApp {
                    name: decl.name.clone(),
                    formals: decl.formals.clone(),
                    derivs,
                    args,
                }));
            }
        }
        Err(SymError::UnknownSymbol(key.to_string()))
    }

    /// Resolve a jet-coordinate name such as `x_at` or `u_g_b`.
    pub fn resolve(&self, name: &str) -> Result<Expr, SymError> {
        if self.is_dependent(name) {
            return self.jet(name, "");
        }
        // Split at an underscore whose prefix is a dependent variable and
        // whose suffix is made only of independent-variable letters.
        for (i, _) in name.match_indices('_').collect::<Vec<_>>().into_iter().rev() {
            let (dep, rest) = (&name[..i], &name[i + 1..]);
            if self.is_dependent(dep) && !rest.is_empty() && rest.chars().all(|c| self.is_independent(&c.to_string())) {
                return self.jet(dep, rest);
            }
        }
        Err(SymError::UnknownSymbol(name.to_string()))
    }

    /// All jet coordinates of exactly the given order (sorted multi-indices).
    pub fn coordinates_of_order(&self, order: usize) -> Vec<JetVar> {
        let mut out = Vec::new();
        for dep in &self.dependent {
            let mut stack: Vec<(Vec<Name>, usize)> = vec![(Vec::new(), 0)];
            while let Some((d, start)) = stack.pop() {
                if d.len() == order {
                    out.push(JetVar { dep: dep.clone(), deriv: d });
                    continue;
                }
                for k in start..self.independent.len() {
                    let mut nd = d.clone();
                    nd.push(self.independent[k].clone());
                    stack.push((nd, k));
                }
            }
        }
        out.sort();
        out
    }

    /// Jet coordinates of order `1..=max_order`, grouped by dependent variable.
    pub fn derivative_coordinates(&self) -> Vec<JetVar> {
        (1..=self.max_order).flat_map(|o| self.coordinates_of_order(o)).collect()
    }
}

fn split_formals(rest: &str, formals: &[Name]) -> Option<Vec<u8>> {
    let mut counts = vec![0u8; formals.len()];
    let mut s = rest;
    while !s.is_empty() {
        // longest formal first so `u_g` wins over `u`
        let mut best: Option<(usize, usize)> = None;
        for (k, f) in formals.iter().enumerate() {
            if s.starts_with(&**f) && best.is_none_or(|(_, l)| f.len() > l) {
                best = Some((k, f.len()));
            }
        }
        let (k, l) = best?;
        counts[k] += 1;
        s = &s[l..];
    }
    Some(counts)
}

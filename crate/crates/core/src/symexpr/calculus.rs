use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::expr::{Atom, Expr, Q};
use super::{JetSpace, SymError};

/// Differentiate with respect to a derivation given by its action on leaf
/// atoms. Function applications and base atoms follow the chain rule.
pub(crate) fn derive(e: &Expr, leaf: &dyn Fn(&Atom) -> Result<Expr, SymError>) -> Result<Expr, SymError> {
    let mut memo: BTreeMap<Atom, Expr> = BTreeMap::new();
    let mut acc = Expr::zero();
    for (m, c) in e.terms() {
        let factors = m.factors();
        for (i, (a, ex)) in factors.iter().enumerate() {
            let da = match memo.get(a) {
                Some(d) => d.clone(),
                None => {
                    let d = atom_derivative(a, leaf)?;
                    memo.insert(a.clone(), d.clone());
                    d
                }
            };
            if da.is_zero() {
                continue;
            }
            let mut rest: BTreeMap<Atom, Q> = BTreeMap::new();
            for (j, (b, eb)) in factors.iter().enumerate() {
                let e2 = if i == j { eb - Q::one() } else { *eb };
                if !e2.is_zero() {
                    rest.insert(b.clone(), e2);
                }
            }
            let coeff = c * ex;
            let term = &Expr::from_factors(coeff, rest) * &da;
            acc = &acc + &term;
        }
    }
    Ok(acc)
}

fn atom_derivative(a: &Atom, leaf: &dyn Fn(&Atom) -> Result<Expr, SymError>) -> Result<Expr, SymError> {
    match a {
        Atom::Base(b) => derive(b, leaf),
        Atom::Func(app) => {
            let mut acc = Expr::zero();
            for (k, arg) in app.args.iter().enumerate() {
                let d = derive(arg, leaf)?;
                if d.is_zero() {
                    continue;
                }
                acc = &acc + &(&Expr::func(app.differentiated(k)) * &d);
            }
            // a formal partial may also be a leaf in its own right
            let own = leaf(a)?;
            Ok(&acc + &own)
        }
        leafatom => leaf(leafatom),
    }
}

/// `∂e/∂v`, treating every jet coordinate as an independent symbol.
pub fn partial(js: &JetSpace, e: &Expr, v: &Expr) -> Result<Expr, SymError> {
    let target = v
        .as_atom()
        .filter(|a| a.is_leaf())
        .ok_or_else(|| SymError::NotASymbol(v.to_string()))?
        .clone();
    match &target {
        Atom::Param(n) if !js.is_param(n) => return Err(SymError::UnknownSymbol(n.to_string())),
        Atom::Indep(n) if !js.is_independent(n) => return Err(SymError::UnknownSymbol(n.to_string())),
        Atom::Jet(j) if !js.is_dependent(&j.dep) => return Err(SymError::UnknownSymbol(j.key())),
        Atom::Func(f) if !js.functions().iter().any(|d| d.name == f.name) => {
            return Err(SymError::UnknownSymbol(f.key()))
        }
        _ => {}
    }
    derive(e, &|a| {
        Ok(if matches!(a, Atom::Func(_)) {
            // function nodes are differentiated through their arguments
            if *a == target {
                Expr::one()
            } else {
                Expr::zero()
            }
        } else if *a == target {
            Expr::one()
        } else {
            Expr::zero()
        })
    })
}

/// Total derivative `D_s e = ∂e/∂s + Σ u_{J,s} ∂e/∂u_J`.
pub fn total_derivative(js: &JetSpace, e: &Expr, s: &str) -> Result<Expr, SymError> {
    if !js.is_independent(s) {
        return Err(SymError::UnknownSymbol(s.to_string()));
    }
    derive(e, &|a| match a {
        Atom::Indep(n) if &**n == s => Ok(Expr::one()),
        Atom::Jet(j) => Ok(Expr::atom(Atom::Jet(js.extend(j, s)?))),
        _ => Ok(Expr::zero()),
    })
}

/// Iterated total derivative over a multi-index.
pub fn total_derivative_multi(js: &JetSpace, e: &Expr, by: &[impl AsRef<str>]) -> Result<Expr, SymError> {
    let mut out = e.clone();
    for s in by {
        out = total_derivative(js, &out, s.as_ref())?;
    }
    Ok(out)
}

/// Euler operator `E^u(L) = Σ_J (-D)_J ∂L/∂u_J`.
///
/// Supported: Lagrangians of order one in any number of independent
/// variables, and of order two when there is a single independent variable.
pub fn euler_operator(js: &JetSpace, lagrangian: &Expr, dep: &str) -> Result<Expr, SymError> {
    if !js.is_dependent(dep) {
        return Err(SymError::UnknownSymbol(dep.to_string()));
    }
    let order = lagrangian.max_order();
    if order > 2 || (order == 2 && js.independent().len() > 1) {
        return Err(SymError::Unsupported(format!(
            "Euler operator for order {order} with {} independent variables",
            js.independent().len()
        )));
    }
    let mut acc = Expr::zero();
    for j in lagrangian.jet_vars() {
        if &*j.dep != dep {
            continue;
        }
        let d = partial(js, lagrangian, &Expr::atom(Atom::Jet(j.clone())))?;
        if d.is_zero() {
            continue;
        }
        let td = total_derivative_multi(js, &d, &j.deriv)?;
        acc = if j.order() % 2 == 0 { &acc + &td } else { &acc - &td };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d() -> JetSpace {
        JetSpace::new(&["x"], &["u"], 2).unwrap()
    }

    #[test]
    fn power_rule() {
        let js = one_d();
        let ux = js.jet("u", "x").unwrap();
        let l = ux.powi(2).scale(Q::new(1, 2));
        assert_eq!(partial(&js, &l, &ux).unwrap(), ux);
    }

    #[test]
    fn total_derivative_of_u() {
        let js = one_d();
        let u = js.jet("u", "").unwrap();
        assert_eq!(total_derivative(&js, &u, "x").unwrap(), js.jet("u", "x").unwrap());
        let l = js.jet("u", "x").unwrap().powi(2).scale(Q::new(1, 2));
        let expect = &js.jet("u", "x").unwrap() * &js.jet("u", "xx").unwrap();
        assert_eq!(total_derivative(&js, &l, "x").unwrap(), expect);
    }

    #[test]
    fn euler_of_dirichlet_energy() {
        let js = one_d();
        let l = js.jet("u", "x").unwrap().powi(2).scale(Q::new(1, 2));
        assert_eq!(euler_operator(&js, &l, "u").unwrap(), -js.jet("u", "xx").unwrap());
        let u2 = js.jet("u", "").unwrap().powi(2);
        assert_eq!(euler_operator(&js, &u2, "u").unwrap(), js.jet("u", "").unwrap().scale(Q::from_integer(2)));
    }

    #[test]
    fn unknown_symbol_is_named() {
        let js = one_d();
        let err = partial(&js, &Expr::one(), &Expr::indep("q")).unwrap_err();
        assert!(err.to_string().contains('q'));
    }

    #[test]
    fn order_overflow() {
        let js = one_d();
        let e = js.jet("u", "xxxx").unwrap();
        assert!(matches!(total_derivative(&js, &e, "x"), Err(SymError::OrderOverflow { .. })));
    }

    #[test]
    fn second_order_multi_independent_rejected() {
        let js = JetSpace::new(&["a", "b"], &["x"], 2).unwrap();
        let l = js.jet("x", "ab").unwrap().powi(2);
        assert!(matches!(euler_operator(&js, &l, "x"), Err(SymError::Unsupported(_))));
    }
}

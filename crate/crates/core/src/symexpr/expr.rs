use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

/// Exact rational coefficient / exponent.
pub type Q = Rational64;

/// Shared, immutable symbol name.
pub type Name = Arc<str>;

/// A jet coordinate: a dependent variable together with the multiset of
/// independent variables it has been differentiated by.
///
/// `deriv` is kept sorted in the order of the owning [`JetSpace`](super::JetSpace)
/// independents, so `x_at` and `x_ta` cannot both exist.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub dep: Name,
    pub deriv: Vec<Name>,
}

impl JetVar {
    pub fn order(&self) -> usize {
        self.deriv.len()
    }

    /// Binding key, e.g. `x`, `x_at`, `u_g_b`.
    pub fn key(&self) -> String {
        if self.deriv.is_empty() {
            self.dep.to_string()
        } else {
            let mut s = String::with_capacity(self.dep.len() + 1 + self.deriv.len());
            s.push_str(&self.dep);
            s.push('_');
            for d in &self.deriv {
                s.push_str(d);
            }
            s
        }
    }
}

/// Application of an opaque parameter function such as `P(x, y)`.
///
/// `derivs[k]` counts formal partial derivatives with respect to argument `k`.
/// Formal partials are first-class symbols: `P_x` evaluates from a binding
/// entry named `P_x`, independently of `P`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FuncApp {
    pub name: Name,
    pub formals: Vec<Name>,
    pub derivs: Vec<u8>,
    pub args: Vec<Expr>,
}

impl FuncApp {
    /// Binding key of the formal partial, e.g. `P`, `P_x`, `R_xy`.
    pub fn key(&self) -> String {
        let mut s = self.name.to_string();
        if self.derivs.iter().any(|&d| d > 0) {
            s.push('_');
            for (formal, &d) in self.formals.iter().zip(&self.derivs) {
                for _ in 0..d {
                    s.push_str(formal);
                }
            }
        }
        s
    }

    pub fn differentiated(&self, arg: usize) -> FuncApp {
        let mut f = self.clone();
        f.derivs[arg] += 1;
        f
    }
}

/// Factor of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Param(Name),
    Indep(Name),
    Jet(JetVar),
    Func(FuncApp),
    /// A non-monomial expression carrying a negative or fractional exponent.
    Base(Expr),
}

impl Atom {
    /// Leaf atoms are the ones a [`PointBinding`](super::PointBinding) assigns values to.
    pub fn is_leaf(&self) -> bool {
        !matches!(self, Atom::Base(_))
    }

    pub fn key(&self) -> String {
        match self {
            Atom::Param(n) | Atom::Indep(n) => n.to_string(),
            Atom::Jet(j) => j.key(),
            Atom::Func(f) => f.key(),
            Atom::Base(e) => format!("({e})"),
        }
    }
}

/// Sorted product of atoms raised to nonzero rational powers.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(pub(crate) Vec<(Atom, Q)>);

impl Monomial {
    pub fn factors(&self) -> &[(Atom, Q)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }
}

/// Immutable symbolic expression in canonical expanded form: a sum of
/// monomials with rational coefficients. Quotients are negative powers.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<BTreeMap<Monomial, Q>>);

fn is_integer(q: &Q) -> bool {
    *q.denom() == 1
}

impl Expr {
    fn from_map(mut map: BTreeMap<Monomial, Q>) -> Expr {
        map.retain(|_, c| !c.is_zero());
        Expr(Arc::new(map))
    }

    pub fn zero() -> Expr {
        Expr(Arc::new(BTreeMap::new()))
    }

    pub fn one() -> Expr {
        Expr::constant(Q::one())
    }

    pub fn constant(c: Q) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(Monomial::default(), c);
        Expr::from_map(map)
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Q::from_integer(n))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::constant(Q::new(n, d))
    }

    pub fn atom(a: Atom) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(Monomial(vec![(a, Q::one())]), Q::one());
        Expr::from_map(map)
    }

    pub fn param(name: &str) -> Expr {
        Expr::atom(Atom::Param(name.into()))
    }

    pub fn indep(name: &str) -> Expr {
        Expr::atom(Atom::Indep(name.into()))
    }

    pub fn func(app: FuncApp) -> Expr {
        Expr::atom(Atom::Func(app))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Q)> {
        self.0.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `Some(c)` when the expression is a rational constant.
    pub fn as_constant(&self) -> Option<Q> {
        match self.0.len() {
            0 => Some(Q::zero()),
            1 => {
                let (m, c) = self.0.iter().next().unwrap();
                m.is_one().then_some(*c)
            }
            _ => None,
        }
    }

    /// The single atom when the expression is exactly `atom^1`.
    pub fn as_atom(&self) -> Option<&Atom> {
        if self.0.len() != 1 {
            return None;
        }
        let (m, c) = self.0.iter().next().unwrap();
        if !c.is_one() || m.0.len() != 1 || !m.0[0].1.is_one() {
            return None;
        }
        Some(&m.0[0].0)
    }

    fn single_term(&self) -> Option<(&Monomial, &Q)> {
        (self.0.len() == 1).then(|| self.0.iter().next().unwrap())
    }

    /// Build `coef * Π atom^exp`, expanding any base atom whose exponent
    /// ends up a positive integer.
    pub(crate) fn from_factors(coef: Q, factors: BTreeMap<Atom, Q>) -> Expr {
        if coef.is_zero() {
            return Expr::zero();
        }
        let mut kept = Vec::with_capacity(factors.len());
        let mut expand = Vec::new();
        for (a, e) in factors {
            if e.is_zero() {
                continue;
            }
            match a {
                Atom::Base(b) if is_integer(&e) && e > Q::zero() => {
                    expand.push((b, e.to_integer() as u32));
                }
                a => kept.push((a, e)),
            }
        }
        let mut map = BTreeMap::new();
        map.insert(Monomial(kept), coef);
        let mut out = Expr::from_map(map);
        for (b, n) in expand {
            out = &out * &b.powi_pos(n);
        }
        out
    }

    fn powi_pos(&self, mut n: u32) -> Expr {
        let mut base = self.clone();
        let mut acc = Expr::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    fn mul_monomial(m1: &Monomial, c1: &Q, m2: &Monomial, c2: &Q) -> Expr {
        let mut factors: BTreeMap<Atom, Q> = BTreeMap::new();
        for (a, e) in m1.0.iter().chain(m2.0.iter()) {
            *factors.entry(a.clone()).or_insert_with(Q::zero) += *e;
        }
        let needs_expand = factors
            .iter()
            .any(|(a, e)| matches!(a, Atom::Base(_)) && is_integer(e) && *e > Q::zero());
        if !needs_expand {
            let kept: Vec<_> = factors.into_iter().filter(|(_, e)| !e.is_zero()).collect();
            let mut map = BTreeMap::new();
            map.insert(Monomial(kept), c1 * c2);
            return Expr::from_map(map);
        }
        Expr::from_factors(c1 * c2, factors)
    }

    /// Raise to a rational power, keeping canonical form.
    pub fn pow(&self, q: Q) -> Expr {
        if q.is_zero() {
            return Expr::one();
        }
        if q.is_one() {
            return self.clone();
        }
        if let Some((m, c)) = self.single_term() {
            if is_integer(&q) {
                let n = q.to_integer();
                let coef = c.pow(n as i32);
                let factors: BTreeMap<Atom, Q> = m.0.iter().map(|(a, e)| (a.clone(), e * q)).collect();
                return Expr::from_factors(coef, factors);
            }
            if c.is_one() && m.0.len() == 1 && m.0[0].1.is_one() && m.0[0].0.is_leaf() {
                let mut map = BTreeMap::new();
                map.insert(Monomial(vec![(m.0[0].0.clone(), q)]), Q::one());
                return Expr::from_map(map);
            }
            if c.is_one() && m.0.len() == 1 && matches!(m.0[0].0, Atom::Base(_)) {
                let (a, e) = &m.0[0];
                let mut f = BTreeMap::new();
                f.insert(a.clone(), e * q);
                return Expr::from_factors(Q::one(), f);
            }
        }
        if self.is_zero() {
            return if q > Q::zero() {
                Expr::zero()
            } else {
                Expr::atom_pow(Atom::Base(Expr::zero()), q)
            };
        }
        if is_integer(&q) && q > Q::zero() {
            return self.powi_pos(q.to_integer() as u32);
        }
        // Normalise the base so its leading coefficient is one; valid for
        // integer exponents only.
        if is_integer(&q) {
            let lead = *self.0.values().next().unwrap();
            if !lead.is_one() {
                let normalized = self * &Expr::constant(lead.recip());
                let coef = lead.pow(q.to_integer() as i32);
                return &Expr::constant(coef) * &Expr::atom_pow(Atom::Base(normalized), q);
            }
        }
        Expr::atom_pow(Atom::Base(self.clone()), q)
    }

    pub fn powi(&self, n: i64) -> Expr {
        self.pow(Q::from_integer(n))
    }

    pub fn sqrt(&self) -> Expr {
        self.pow(Q::new(1, 2))
    }

    pub fn recip(&self) -> Expr {
        self.powi(-1)
    }

    fn atom_pow(a: Atom, q: Q) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(Monomial(vec![(a, q)]), Q::one());
        Expr::from_map(map)
    }

    pub fn scale(&self, c: Q) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr::from_map(self.0.iter().map(|(m, k)| (m.clone(), k * c)).collect())
    }

    /// Leaf atoms (parameters, independents, jet coordinates, function
    /// partials), including those nested inside base atoms.
    pub fn leaves(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut BTreeSet<Atom>) {
        for m in self.0.keys() {
            for (a, _) in &m.0 {
                match a {
                    Atom::Base(b) => b.collect_leaves(out),
                    leaf => {
                        out.insert(leaf.clone());
                    }
                }
            }
        }
    }

    /// Every jet coordinate referenced anywhere, including inside function arguments.
    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        let mut out = BTreeSet::new();
        self.collect_jets(&mut out);
        out
    }

    fn collect_jets(&self, out: &mut BTreeSet<JetVar>) {
        for m in self.0.keys() {
            for (a, _) in &m.0 {
                match a {
                    Atom::Jet(j) => {
                        out.insert(j.clone());
                    }
                    Atom::Base(b) => b.collect_jets(out),
                    Atom::Func(f) => f.args.iter().for_each(|e| e.collect_jets(out)),
                    _ => {}
                }
            }
        }
    }

    /// Maximum jet order appearing in the expression.
    pub fn max_order(&self) -> usize {
        self.jet_vars().iter().map(JetVar::order).max().unwrap_or(0)
    }

    /// Replace every occurrence of `target` by `replacement`, recursing into
    /// base atoms and function arguments.
    pub fn substitute(&self, target: &Atom, replacement: &Expr) -> Expr {
        self.map_atoms(&|a| (a == target).then(|| replacement.clone()))
    }

    /// Rebuild the expression, replacing atoms for which `f` returns `Some`.
    /// Atoms are visited after their interior has been rewritten.
    pub fn map_atoms(&self, f: &dyn Fn(&Atom) -> Option<Expr>) -> Expr {
        let mut acc = Expr::zero();
        for (m, c) in self.0.iter() {
            let mut term = Expr::constant(*c);
            for (a, e) in &m.0 {
                let rebuilt = match a {
                    Atom::Base(b) => Atom::Base(b.map_atoms(f)),
                    Atom::Func(app) => {
                        let mut app = app.clone();
                        app.args = app.args.iter().map(|x| x.map_atoms(f)).collect();
                        Atom::Func(app)
                    }
                    other => other.clone(),
                };
                let base = match f(&rebuilt) {
                    Some(r) => r,
                    None => match rebuilt {
                        Atom::Base(b) => b,
                        other => Expr::atom(other),
                    },
                };
                term = &term * &base.pow(*e);
            }
            acc = &acc + &term;
        }
        acc
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let mut map = (*self.0).clone();
        for (m, c) in rhs.0.iter() {
            *map.entry(m.clone()).or_insert_with(Q::zero) += *c;
        }
        Expr::from_map(map)
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        let mut acc: BTreeMap<Monomial, Q> = BTreeMap::new();
        let mut extra = Expr::zero();
        for (m1, c1) in self.0.iter() {
            for (m2, c2) in rhs.0.iter() {
                let prod = Expr::mul_monomial(m1, c1, m2, c2);
                if let Some((m, c)) = prod.single_term() {
                    *acc.entry(m.clone()).or_insert_with(Q::zero) += *c;
                } else {
                    extra = &extra + &prod;
                }
            }
        }
        &Expr::from_map(acc) + &extra
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-Q::one())
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        self * &rhs.recip()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr {
                (&self).$m(rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |a, b| &a + &b)
    }
}

fn fmt_exponent(f: &mut fmt::Formatter<'_>, e: &Q) -> fmt::Result {
    if e.is_one() {
        Ok(())
    } else if is_integer(e) && e.is_positive() {
        write!(f, "^{}", e.numer())
    } else if is_integer(e) {
        write!(f, "^({})", e.numer())
    } else {
        write!(f, "^({}/{})", e.numer(), e.denom())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Param(n) | Atom::Indep(n) => write!(f, "{n}"),
            Atom::Jet(j) => write!(f, "{}", j.key()),
            Atom::Func(app) => {
                write!(f, "{}(", app.key())?;
                for (i, a) in app.args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Atom::Base(b) => write!(f, "({b})"),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (a, e)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{a}")?;
            fmt_exponent(f, e)?;
        }
        Ok(())
    }
}

/// Deterministic canonical printing; the output parses back to the same
/// expression with [`parse_expr`](super::parse_expr).
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.0.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                if is_integer(&mag) {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "{}/{}", mag.numer(), mag.denom())?;
                }
            } else {
                if !mag.is_one() {
                    if is_integer(&mag) {
                        write!(f, "{}*", mag.numer())?;
                    } else {
                        write!(f, "{}/{}*", mag.numer(), mag.denom())?;
                    }
                }
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

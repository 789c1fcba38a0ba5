//! Shallow-water Lagrangians in particle-label coordinates, depth, invariant
//! derivatives and potential vorticity.

use crate::noether::{infinitesimal_criterion, NoetherError, SymmetryGenerator};
use crate::symexpr::{
    equivalent, euler_operator, parse_expr, partial, total_derivative, Atom, Expr, FuncApp, JetSpace, PointBinding,
    SymError, Q,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Noether(#[from] NoetherError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("gauge `{gauge}` violates {constraint}")]
    GaugeViolation { gauge: String, constraint: String },
    #[error("singular deformation: Δ = {delta}")]
    Singular { delta: f64 },
    #[error("Coriolis parameter f must be nonzero")]
    ZeroCoriolis,
    #[error("sample lacks {0}")]
    MissingData(&'static str),
}

/// Coriolis parameter and gravity, both nondimensional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SWParams {
    pub f: f64,
    pub g: f64,
}

impl SWParams {
    pub fn new(f: f64, g: f64) -> Result<Self, ModelError> {
        if !f.is_finite() || !g.is_finite() {
            return Err(ModelError::InvalidParams("f and g must be finite".into()));
        }
        if g == 0.0 {
            return Err(ModelError::InvalidParams("g must be nonzero".into()));
        }
        Ok(SWParams { f, g })
    }

    pub fn binding(&self) -> PointBinding {
        PointBinding::new().with("f", self.f).with("g", self.g)
    }
}

impl Default for SWParams {
    fn default() -> Self {
        SWParams { f: 1.0, g: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum GaugeKind {
    /// `P = f x/2`, `R = f y/2`, `p = u_g/(2f)`, `r = v_g/(2f)`.
    Symmetric,
    /// `P = f x`, `R = 0`, `p = u_g/f`, `r = 0`.
    XOnly,
    /// Arbitrary functions; constraints enter as rewrite rules.
    Opaque,
    Custom { big_p: String, big_r: String, p: String, r: String },
}

/// Gauge functions `P(x,y)`, `R(x,y)`, `p(u_g,v_g)`, `r(u_g,v_g)` with
/// `P_x + R_y = f` and `p_{u_g} + r_{v_g} = 1/f`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeChoice {
    pub id: String,
    kind: GaugeKind,
}

/// Gauge functions resolved in a particular jet space.
#[derive(Clone, Debug)]
pub struct GaugeExprs {
    pub big_p: Expr,
    pub big_r: Expr,
    pub p: Expr,
    pub r: Expr,
}

impl Default for GaugeChoice {
    fn default() -> Self {
        GaugeChoice::symmetric()
    }
}

impl GaugeChoice {
    pub fn symmetric() -> Self {
        GaugeChoice { id: "symmetric".into(), kind: GaugeKind::Symmetric }
    }

    pub fn x_only() -> Self {
        GaugeChoice { id: "x-only".into(), kind: GaugeKind::XOnly }
    }

    pub fn opaque() -> Self {
        GaugeChoice { id: "opaque".into(), kind: GaugeKind::Opaque }
    }

    /// Gauge from expression text; `p` and `r` may be empty for Salmon.
    pub fn custom(big_p: &str, big_r: &str, p: &str, r: &str) -> Self {
        GaugeChoice {
            id: "custom".into(),
            kind: GaugeKind::Custom { big_p: big_p.into(), big_r: big_r.into(), p: p.into(), r: r.into() },
        }
    }

    pub fn by_id(id: &str) -> Option<Self> {
        match id {
            "symmetric" => Some(Self::symmetric()),
            "x-only" => Some(Self::x_only()),
            "opaque" => Some(Self::opaque()),
            _ => None,
        }
    }

    pub fn is_opaque(&self) -> bool {
        self.kind == GaugeKind::Opaque
    }

    pub fn exprs(&self, js: &JetSpace) -> Result<GaugeExprs, SymError> {
        let geo = js.is_dependent("u_g");
        let src = |s: &str| -> Result<Expr, SymError> {
            if s.trim().is_empty() {
                Ok(Expr::zero())
            } else {
                parse_expr(js, s)
            }
        };
        let (pp, rr, p, r) = match &self.kind {
            GaugeKind::Symmetric => ("f*x/2", "f*y/2", "u_g/(2*f)", "v_g/(2*f)"),
            GaugeKind::XOnly => ("f*x", "0", "u_g/f", "0"),
            GaugeKind::Opaque => {
                let xy = vec![js.jet("x", "")?, js.jet("y", "")?];
                let (p, r) = if geo {
                    let g = vec![js.jet("u_g", "")?, js.jet("v_g", "")?];
                    (js.apply("p", g.clone())?, js.apply("r", g)?)
                } else {
                    (Expr::zero(), Expr::zero())
                };
                return Ok(GaugeExprs { big_p: js.apply("P", xy.clone())?, big_r: js.apply("R", xy)?, p, r });
            }
            GaugeKind::Custom { big_p, big_r, p, r } => {
                return Ok(GaugeExprs {
                    big_p: src(big_p)?,
                    big_r: src(big_r)?,
                    p: if geo { src(p)? } else { Expr::zero() },
                    r: if geo { src(r)? } else { Expr::zero() },
                });
            }
        };
        Ok(GaugeExprs {
            big_p: src(pp)?,
            big_r: src(rr)?,
            p: if geo { src(p)? } else { Expr::zero() },
            r: if geo { src(r)? } else { Expr::zero() },
        })
    }

    fn validate(&self, js: &JetSpace) -> Result<GaugeExprs, ModelError> {
        let g = self.exprs(js)?;
        if self.is_opaque() {
            return Ok(g);
        }
        let x = js.jet("x", "")?;
        let y = js.jet("y", "")?;
        let c1 = &(&partial(js, &g.big_p, &x)? + &partial(js, &g.big_r, &y)?) - &Expr::param("f");
        if !equivalent(&c1, &Expr::zero(), 50)? {
            return Err(ModelError::GaugeViolation { gauge: self.id.clone(), constraint: "P_x + R_y = f".into() });
        }
        if js.is_dependent("u_g") {
            let ug = js.jet("u_g", "")?;
            let vg = js.jet("v_g", "")?;
            let c2 = &(&partial(js, &g.p, &ug)? + &partial(js, &g.r, &vg)?) - &Expr::param("f").recip();
            if !equivalent(&c2, &Expr::zero(), 50)? {
                return Err(ModelError::GaugeViolation {
                    gauge: self.id.clone(),
                    constraint: "p_{u_g} + r_{v_g} = 1/f".into(),
                });
            }
        }
        Ok(g)
    }
}

/// Apply the gauge constraints as rewrites on opaque formal partials:
/// `P_x -> f - R_y` and `p_{u_g} -> 1/f - r_{v_g}` (and their derivatives).
pub fn rewrite_gauge(e: &Expr) -> Expr {
    e.map_atoms(&|a| {
        let Atom::Func(app) = a else { return None };
        let (partner, constant) = match &*app.name {
            "P" => ("R", Expr::param("f")),
            "p" => ("r", Expr::param("f").recip()),
            _ => return None,
        };
        if app.derivs.len() != 2 || app.derivs[0] == 0 {
            return None;
        }
        let mut derivs = app.derivs.clone();
        derivs[0] -= 1;
        let base_term = if derivs == [0, 0] { constant } else { Expr::zero() };
        derivs[1] += 1;
        let other = Expr::func(FuncApp { name: partner.into(), formals: app.formals.clone(), derivs, args: app.args.clone() });
        Some(&base_term - &other)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Salmon,
    Sg,
    Custom,
}

/// A label-space Lagrangian together with its parameters.
#[derive(Clone, Debug)]
pub struct LagrangianSpec {
    pub model: Model,
    pub js: JetSpace,
    pub lagrangian: Expr,
    pub params: SWParams,
    pub gauge: Option<GaugeChoice>,
    /// Dependent variables whose time derivatives appear in the Lagrangian.
    pub time_dependent: Vec<String>,
}

fn sw_space(deps: &[&str], opaque: bool) -> Result<JetSpace, SymError> {
    let mut js = JetSpace::new(&["a", "b", "t"], deps, 1)?.with_params(&["f", "g"]);
    if opaque {
        js = js.with_function("P", &["x", "y"]).with_function("R", &["x", "y"]);
        if deps.contains(&"u_g") {
            js = js.with_function("p", &["u_g", "v_g"]).with_function("r", &["u_g", "v_g"]);
        }
    }
    Ok(js)
}

/// `Δ = x_a y_b - x_b y_a`.
pub fn delta_expr(js: &JetSpace) -> Result<Expr, SymError> {
    Ok(&(&js.jet("x", "a")? * &js.jet("y", "b")?) - &(&js.jet("x", "b")? * &js.jet("y", "a")?))
}

/// `h = 1/Δ`.
pub fn depth_expr(js: &JetSpace) -> Result<Expr, SymError> {
    Ok(delta_expr(js)?.recip())
}

fn time_dependent(js: &JetSpace, l: &Expr) -> Vec<String> {
    js.dependent()
        .iter()
        .filter(|d| l.jet_vars().iter().any(|j| &j.dep == *d && j.deriv.iter().any(|s| &**s == "t")))
        .map(|d| d.to_string())
        .collect()
}

/// `L = (u - R) x_t + (v + P) y_t - (u^2 + v^2 + g h)/2`.
pub fn salmon_lagrangian(params: SWParams, gauge: GaugeChoice) -> Result<LagrangianSpec, ModelError> {
    let js = sw_space(&["x", "y", "u", "v"], gauge.is_opaque())?;
    let g = gauge.validate(&js)?;
    let j = |d: &str, s: &str| js.jet(d, s);
    let kin = &(&(&j("u", "")? - &g.big_r) * &j("x", "t")?) + &(&(&j("v", "")? + &g.big_p) * &j("y", "t")?);
    let pot = &(&j("u", "")?.powi(2) + &j("v", "")?.powi(2)) + &(&Expr::param("g") * &depth_expr(&js)?);
    let l = &kin - &pot.scale(Q::new(1, 2));
    let td = time_dependent(&js, &l);
    Ok(LagrangianSpec { model: Model::Salmon, js, lagrangian: l, params, gauge: Some(gauge), time_dependent: td })
}

/// `L = (u_g - R) x_t + (v_g + P) y_t - (u_g^2 + v_g^2 + g h)/2 - r u_g,t + p v_g,t`.
pub fn sg_lagrangian(params: SWParams, gauge: GaugeChoice) -> Result<LagrangianSpec, ModelError> {
    if params.f == 0.0 {
        return Err(ModelError::ZeroCoriolis);
    }
    let js = sw_space(&["x", "y", "u_g", "v_g"], gauge.is_opaque())?;
    let g = gauge.validate(&js)?;
    let j = |d: &str, s: &str| js.jet(d, s);
    let kin = &(&(&j("u_g", "")? - &g.big_r) * &j("x", "t")?) + &(&(&j("v_g", "")? + &g.big_p) * &j("y", "t")?);
    let pot = &(&j("u_g", "")?.powi(2) + &j("v_g", "")?.powi(2)) + &(&Expr::param("g") * &depth_expr(&js)?);
    let geo = &(&g.p * &j("v_g", "t")?) - &(&g.r * &j("u_g", "t")?);
    let l = &(&kin - &pot.scale(Q::new(1, 2))) + &geo;
    let td = time_dependent(&js, &l);
    Ok(LagrangianSpec { model: Model::Sg, js, lagrangian: l, params, gauge: Some(gauge), time_dependent: td })
}

/// A first-order Lagrangian given as text over `(a, b, t) -> (x, y)` plus
/// any extra dependent variables.
pub fn custom_lagrangian(params: SWParams, extra_deps: &[&str], src: &str) -> Result<LagrangianSpec, ModelError> {
    let mut deps = vec!["x", "y"];
    deps.extend_from_slice(extra_deps);
    let js = sw_space(&deps, false)?;
    let l = parse_expr(&js, src)?;
    if l.max_order() > 1 {
        return Err(SymError::Unsupported("custom Lagrangians must be first order".into()).into());
    }
    let td = time_dependent(&js, &l);
    Ok(LagrangianSpec { model: Model::Custom, js, lagrangian: l, params, gauge: None, time_dependent: td })
}

impl LagrangianSpec {
    pub fn euler(&self, dep: &str) -> Result<Expr, SymError> {
        Ok(rewrite_gauge(&euler_operator(&self.js, &self.lagrangian, dep)?))
    }

    pub fn euler_system(&self) -> Result<Vec<(String, Expr)>, SymError> {
        self.js.dependent().iter().map(|d| Ok((d.to_string(), self.euler(d)?))).collect()
    }

    /// Generators used for the label-time Noether identities.
    pub fn standard_generators(&self) -> Result<Vec<SymmetryGenerator>, SymError> {
        let js = &self.js;
        let mut out = vec![
            SymmetryGenerator::translation(js, "t")?,
            SymmetryGenerator::translation(js, "a")?,
            SymmetryGenerator::translation(js, "b")?,
        ];
        let rotating = match self.model {
            Model::Salmon => Some(vec![("x", "y"), ("u", "v")]),
            Model::Sg => Some(vec![("x", "y"), ("u_g", "v_g")]),
            Model::Custom => None,
        };
        let symmetric = self.gauge.as_ref().is_some_and(|g| g.kind == GaugeKind::Symmetric);
        if let (Some(pairs), true) = (rotating, symmetric) {
            out.push(SymmetryGenerator::rotation(js, &pairs)?);
        }
        Ok(out)
    }

    /// `true` when the Lagrangian is invariant under relabelling by an
    /// arbitrary stream function.
    pub fn relabelling_invariant(&self) -> Result<bool, ModelError> {
        let js = self.js.clone().with_function("phi", &["a", "b"]);
        let psi = js.apply("phi", vec![Expr::indep("a"), Expr::indep("b")])?;
        let g = SymmetryGenerator::relabelling(&js, &psi)?;
        Ok(infinitesimal_criterion(&js, &self.lagrangian, &g)?.is_invariant)
    }
}

/// Eulerian derivative `∂F/∂x = (y_b D_a F - y_a D_b F)/Δ`.
pub fn invariant_dx(js: &JetSpace, e: &Expr) -> Result<Expr, SymError> {
    let num = &(&js.jet("y", "b")? * &total_derivative(js, e, "a")?) - &(&js.jet("y", "a")? * &total_derivative(js, e, "b")?);
    Ok(&num * &depth_expr(js)?)
}

/// Eulerian derivative `∂F/∂y = (-x_b D_a F + x_a D_b F)/Δ`.
pub fn invariant_dy(js: &JetSpace, e: &Expr) -> Result<Expr, SymError> {
    let num = &(&js.jet("x", "a")? * &total_derivative(js, e, "b")?) - &(&js.jet("x", "b")? * &total_derivative(js, e, "a")?);
    Ok(&num * &depth_expr(js)?)
}

/// Symbolic `Ω = Δ (∂v/∂x - ∂u/∂y + f)` with `u`, `v` the named velocity fields.
pub fn sw_pv_expr(js: &JetSpace, u: &str, v: &str) -> Result<Expr, SymError> {
    let (u, v) = (js.jet(u, "")?, js.jet(v, "")?);
    let inner = &(&invariant_dx(js, &v)? - &invariant_dy(js, &u)?) + &Expr::param("f");
    Ok(&delta_expr(js)? * &inner)
}

/// Symbolic `Ω* = Δ (f + ∂v_g/∂x - ∂u_g/∂y + ∂(u_g,v_g)/∂(x,y) / f)`.
pub fn sg_pv_expr(js: &JetSpace) -> Result<Expr, SymError> {
    let (ug, vg) = (js.jet("u_g", "")?, js.jet("v_g", "")?);
    let (ugx, ugy) = (invariant_dx(js, &ug)?, invariant_dy(js, &ug)?);
    let (vgx, vgy) = (invariant_dx(js, &vg)?, invariant_dy(js, &vg)?);
    let jac = &(&ugx * &vgy) - &(&ugy * &vgx);
    let inner = &(&(&Expr::param("f") + &vgx) - &ugy) + &(&jac / &Expr::param("f"));
    Ok(&delta_expr(js)? * &inner)
}

/// Geostrophic velocity data at a sample.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Geostrophic {
    pub ug: f64,
    pub vg: f64,
    pub ug_a: f64,
    pub ug_b: f64,
    pub vg_a: f64,
    pub vg_b: f64,
}

/// Point values and first label derivatives at one label-space point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EulerianSample {
    pub x: f64,
    pub y: f64,
    pub x_a: f64,
    pub x_b: f64,
    pub y_a: f64,
    pub y_b: f64,
    pub u: f64,
    pub v: f64,
    pub u_a: f64,
    pub u_b: f64,
    pub v_a: f64,
    pub v_b: f64,
    pub geo: Option<Geostrophic>,
    /// `(h_a, h_b)`, needed for the geostrophic velocity.
    pub h_ab: Option<(f64, f64)>,
}

impl EulerianSample {
    /// Identity deformation at `(a, b)` at rest.
    pub fn identity(a: f64, b: f64) -> Self {
        EulerianSample { x: a, y: b, x_a: 1.0, y_b: 1.0, ..Default::default() }
    }

    pub fn delta(&self) -> f64 {
        self.x_a * self.y_b - self.x_b * self.y_a
    }

    fn checked_delta(&self) -> Result<f64, ModelError> {
        let d = self.delta();
        if d == 0.0 || !d.is_finite() {
            Err(ModelError::Singular { delta: d })
        } else {
            Ok(d)
        }
    }

    /// `∂F/∂x` from label derivatives `(F_a, F_b)`.
    pub fn d_dx(&self, fa: f64, fb: f64) -> Result<f64, ModelError> {
        Ok((self.y_b * fa - self.y_a * fb) / self.checked_delta()?)
    }

    /// `∂F/∂y` from label derivatives `(F_a, F_b)`.
    pub fn d_dy(&self, fa: f64, fb: f64) -> Result<f64, ModelError> {
        Ok((-self.x_b * fa + self.x_a * fb) / self.checked_delta()?)
    }

    /// Compose with a linear relabelling `(a, b) = M (a', b')`.
    pub fn relabel(&self, m: [[f64; 2]; 2]) -> Self {
        let tr = |fa: f64, fb: f64| (fa * m[0][0] + fb * m[1][0], fa * m[0][1] + fb * m[1][1]);
        let mut s = *self;
        (s.x_a, s.x_b) = tr(self.x_a, self.x_b);
        (s.y_a, s.y_b) = tr(self.y_a, self.y_b);
        (s.u_a, s.u_b) = tr(self.u_a, self.u_b);
        (s.v_a, s.v_b) = tr(self.v_a, self.v_b);
        if let Some(g) = self.geo {
            let mut ng = g;
            (ng.ug_a, ng.ug_b) = tr(g.ug_a, g.ug_b);
            (ng.vg_a, ng.vg_b) = tr(g.vg_a, g.vg_b);
            s.geo = Some(ng);
        }
        s.h_ab = self.h_ab.map(|(ha, hb)| tr(ha, hb));
        s
    }
}

/// `h = 1/Δ`.
pub fn depth(s: &EulerianSample) -> Result<f64, ModelError> {
    Ok(1.0 / s.checked_delta()?)
}

/// `Ω = (1/h)(∂v/∂x - ∂u/∂y + f)`.
pub fn sw_pv(s: &EulerianSample, params: &SWParams) -> Result<f64, ModelError> {
    let d = s.checked_delta()?;
    Ok(d * (s.d_dx(s.v_a, s.v_b)? - s.d_dy(s.u_a, s.u_b)? + params.f))
}

/// `Ω* = (1/h)(f + ∂v_g/∂x - ∂u_g/∂y + ∂(u_g,v_g)/∂(x,y) / f)`.
pub fn sg_pv(s: &EulerianSample, params: &SWParams) -> Result<f64, ModelError> {
    if params.f == 0.0 {
        return Err(ModelError::ZeroCoriolis);
    }
    let g = s.geo.ok_or(ModelError::MissingData("geostrophic velocity"))?;
    let d = s.checked_delta()?;
    let (ugx, ugy) = (s.d_dx(g.ug_a, g.ug_b)?, s.d_dy(g.ug_a, g.ug_b)?);
    let (vgx, vgy) = (s.d_dx(g.vg_a, g.vg_b)?, s.d_dy(g.vg_a, g.vg_b)?);
    Ok(d * (params.f + vgx - ugy + (ugx * vgy - ugy * vgx) / params.f))
}

/// `(u_g, v_g) = (-(g/f) h (x_a h_b - x_b h_a), (g/f) h (y_b h_a - y_a h_b))`.
pub fn geostrophic_velocity(s: &EulerianSample, params: &SWParams) -> Result<(f64, f64), ModelError> {
    if params.f == 0.0 {
        return Err(ModelError::ZeroCoriolis);
    }
    let (ha, hb) = s.h_ab.ok_or(ModelError::MissingData("label derivatives of h"))?;
    let h = depth(s)?;
    let k = params.g / params.f;
    Ok((-k * h * (s.x_a * hb - s.x_b * ha), k * h * (s.y_b * ha - s.y_a * hb)))
}

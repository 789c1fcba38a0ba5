use swnoether::noether::{noether_current_swe, pv_from_momenta, SymmetryGenerator};
use swnoether::swmodels::{
    depth_expr, invariant_dx, invariant_dy, rewrite_gauge, salmon_lagrangian, sg_lagrangian, sg_pv, sg_pv_expr,
    sw_pv, sw_pv_expr, EulerianSample, GaugeChoice, Geostrophic, LagrangianSpec, SWParams,
};
use swnoether::symexpr::{
    equivalent, evaluate, parse_expr, random_binding, total_derivative, total_derivative_multi, Atom, Expr, JetSpace,
    JetVar, Sampler,
};

fn params() -> SWParams {
    SWParams::new(1.0, 1.0).unwrap()
}

fn zero(e: &Expr) -> bool {
    equivalent(e, &Expr::zero(), 100).unwrap()
}

fn stream(js: &JetSpace) -> (JetSpace, Expr) {
    let js = js.clone().with_function("phi", &["a", "b"]);
    let psi = js.apply("phi", vec![Expr::indep("a"), Expr::indep("b")]).unwrap();
    (js, psi)
}

fn check_all_identities(spec: &LagrangianSpec) {
    for g in spec.standard_generators().unwrap() {
        let c = noether_current_swe(&spec.js, &spec.lagrangian, &g).unwrap();
        assert!(zero(&c.identity_residual(&spec.js, &spec.lagrangian).unwrap()), "{}", g.name);
    }
    let (js, psi) = stream(&spec.js);
    let g = SymmetryGenerator::relabelling(&js, &psi).unwrap();
    let c = noether_current_swe(&js, &spec.lagrangian, &g).unwrap();
    assert!(zero(&c.identity_residual(&js, &spec.lagrangian).unwrap()));
    let q = parse_expr(&js, "phi_a(a, b)*x_b - phi_b(a, b)*x_a").unwrap();
    assert_eq!(c.characteristics[0], q);
}

#[test]
fn noether_identities_hold_for_both_models_and_gauges() {
    for gauge in [GaugeChoice::symmetric(), GaugeChoice::x_only(), GaugeChoice::opaque()] {
        check_all_identities(&salmon_lagrangian(params(), gauge.clone()).unwrap());
        check_all_identities(&sg_lagrangian(params(), gauge).unwrap());
    }
}

#[test]
fn energy_and_momentum_densities() {
    let spec = salmon_lagrangian(params(), GaugeChoice::symmetric()).unwrap();
    let js = &spec.js;
    let l = &spec.lagrangian;
    let lt = |d: &str| swnoether::symexpr::partial(js, l, &js.jet(d, "t").unwrap()).unwrap();
    let j = |d: &str, s: &str| js.jet(d, s).unwrap();
    let t = noether_current_swe(js, l, &SymmetryGenerator::translation(js, "t").unwrap()).unwrap();
    let energy = &(l - &(&j("x", "t") * &lt("x"))) - &(&j("y", "t") * &lt("y"));
    assert!(zero(&(t.density().unwrap() - &energy)));
    let a = noether_current_swe(js, l, &SymmetryGenerator::translation(js, "a").unwrap()).unwrap();
    let momentum = &(&j("x", "a") * &lt("x")) + &(&j("y", "a") * &lt("y"));
    assert!(zero(&(a.density().unwrap() + &momentum)));
}

#[test]
fn label_dependent_lagrangian_is_not_relabelling_invariant() {
    let spec = swnoether::swmodels::custom_lagrangian(params(), &[], "a*x_t").unwrap();
    assert!(!spec.relabelling_invariant().unwrap());
    assert!(salmon_lagrangian(params(), GaugeChoice::symmetric()).unwrap().relabelling_invariant().unwrap());
    assert!(sg_lagrangian(params(), GaugeChoice::opaque()).unwrap().relabelling_invariant().unwrap());
}

/// Residuals `lhs - rhs` of the potential form of the shallow-water and
/// semi-geostrophic equations, written independently of the library.
fn hx_hy(js: &JetSpace) -> (Expr, Expr) {
    let h = depth_expr(js).unwrap();
    let ha = total_derivative(js, &h, "a").unwrap();
    let hb = total_derivative(js, &h, "b").unwrap();
    let j = |d: &str, s: &str| js.jet(d, s).unwrap();
    let hx = &h * &(&(&j("y", "b") * &ha) - &(&j("y", "a") * &hb));
    let hy = &h * &(&(&j("x", "a") * &hb) - &(&j("x", "b") * &ha));
    (hx, hy)
}

fn ratio_is(e: &Expr, f: &Expr, sign: f64) -> bool {
    zero(&(e - &f.scale(swnoether::symexpr::Q::from_integer(sign as i64))))
}

#[test]
fn salmon_euler_lagrange_matches_potential_form() {
    let spec = salmon_lagrangian(params(), GaugeChoice::opaque()).unwrap();
    let js = &spec.js;
    let j = |d: &str, s: &str| js.jet(d, s).unwrap();
    let (hx, hy) = hx_hy(js);
    let (f, g) = (Expr::param("f"), Expr::param("g"));
    let fa = &j("x", "t") - &j("u", "");
    let fb = &j("y", "t") - &j("v", "");
    let fc = &(&j("u", "t") + &(&g * &hx)) - &(&f * &j("v", ""));
    let fd = &(&j("v", "t") + &(&g * &hy)) + &(&f * &j("u", ""));
    assert!(ratio_is(&spec.euler("u").unwrap(), &fa, 1.0));
    assert!(ratio_is(&spec.euler("v").unwrap(), &fb, 1.0));
    assert!(zero(&(&spec.euler("x").unwrap() - &(&(&f * &fb) - &fc))));
    assert!(zero(&(&spec.euler("y").unwrap() - &(&(-&fd) - &(&f * &fa)))));
}

#[test]
fn sg_euler_lagrange_matches_potential_form() {
    let spec = sg_lagrangian(SWParams::new(0.7, 1.3).unwrap(), GaugeChoice::opaque()).unwrap();
    let js = &spec.js;
    let j = |d: &str, s: &str| js.jet(d, s).unwrap();
    let (hx, hy) = hx_hy(js);
    let (f, g) = (Expr::param("f"), Expr::param("g"));
    let gf = &g / &f;
    let fa = &j("u_g", "") + &(&gf * &hy);
    let fb = &j("v_g", "") - &(&gf * &hx);
    let fc = &(&j("u_g", "t") + &(&g * &hx)) - &(&f * &j("y", "t"));
    let fd = &(&j("v_g", "t") + &(&g * &hy)) + &(&f * &j("x", "t"));
    assert!(ratio_is(&spec.euler("x").unwrap(), &fc, -1.0));
    assert!(ratio_is(&spec.euler("y").unwrap(), &fd, -1.0));
    assert!(zero(&(&spec.euler("u_g").unwrap() - &(&(-&fa) + &(&fd / &f)))));
    assert!(zero(&(&spec.euler("v_g").unwrap() - &(&(-&fb) - &(&fc / &f)))));
}

#[test]
fn salmon_euler_lagrange_is_gauge_independent() {
    let a = salmon_lagrangian(params(), GaugeChoice::symmetric()).unwrap();
    let b = salmon_lagrangian(params(), GaugeChoice::x_only()).unwrap();
    for ((da, ea), (_, eb)) in a.euler_system().unwrap().iter().zip(b.euler_system().unwrap().iter()) {
        assert!(equivalent(ea, eb, 100).unwrap(), "{da}");
    }
}

#[test]
fn pv_from_momenta_is_minus_potential_vorticity() {
    let spec = salmon_lagrangian(params(), GaugeChoice::opaque()).unwrap();
    let pv = rewrite_gauge(&pv_from_momenta(&spec.js, &spec.lagrangian).unwrap());
    let omega = sw_pv_expr(&spec.js, "u", "v").unwrap();
    assert!(zero(&(&pv + &omega)));
    assert!(!zero(&(&pv - &omega)));
    let spec = sg_lagrangian(params(), GaugeChoice::opaque()).unwrap();
    let pv = rewrite_gauge(&pv_from_momenta(&spec.js, &spec.lagrangian).unwrap());
    assert!(zero(&(&pv + &sg_pv_expr(&spec.js).unwrap())));
}

#[test]
fn constant_momenta_give_zero_pv() {
    let js = JetSpace::new(&["a", "b", "t"], &["x", "y"], 1).unwrap();
    let l = parse_expr(&js, "2*x_t - 3*y_t").unwrap();
    assert!(pv_from_momenta(&js, &l).unwrap().is_zero());
}

/// Replace every time-differentiated jet coordinate by the total label
/// derivative of its on-shell value.
fn on_shell(js: &JetSpace, e: &Expr, rhs: &[(&str, Expr)]) -> Expr {
    e.map_atoms(&|a| {
        let Atom::Jet(j) = a else { return None };
        let i = j.deriv.iter().position(|s| &**s == "t")?;
        let (_, r) = rhs.iter().find(|(d, _)| *d == &*j.dep)?;
        let mut rest: Vec<_> = j.deriv.clone();
        rest.remove(i);
        let rest: Vec<String> = rest.iter().map(|s| s.to_string()).collect();
        Some(total_derivative_multi(js, r, &rest).unwrap())
    })
}

#[test]
fn pv_density_is_conserved_on_shell() {
    let spec = salmon_lagrangian(SWParams::new(0.9, 1.1).unwrap(), GaugeChoice::symmetric()).unwrap();
    let js = &spec.js;
    let density = pv_from_momenta(js, &spec.lagrangian).unwrap();
    let rate = total_derivative(js, &density, "t").unwrap();
    let (hx, hy) = hx_hy(js);
    let (f, g) = (Expr::param("f"), Expr::param("g"));
    let u = js.jet("u", "").unwrap();
    let v = js.jet("v", "").unwrap();
    let ut = &(&f * &v) - &(&g * &hx);
    let vt = &(-&(&f * &u)) - &(&g * &hy);
    let shell = on_shell(js, &rate, &[("x", u.clone()), ("y", v.clone()), ("u", ut), ("v", vt)]);
    assert!(shell.jet_vars().iter().all(|j: &JetVar| !j.deriv.iter().any(|s| &**s == "t")));
    let mut s = Sampler::new(11);
    for _ in 0..100 {
        let b = random_binding(&[&shell], &mut s, 200).unwrap().with("f", 0.9).with("g", 1.1);
        let val = evaluate(&shell, &b).unwrap();
        assert!(val.abs() <= 1e-8, "{val}");
    }
}

#[test]
fn invariant_derivative_examples() {
    let spec = salmon_lagrangian(params(), GaugeChoice::symmetric()).unwrap();
    let js = &spec.js;
    let x = js.jet("x", "").unwrap();
    let y = js.jet("y", "").unwrap();
    assert!(zero(&(&invariant_dx(js, &x).unwrap() - &Expr::one())));
    assert!(zero(&invariant_dx(js, &y).unwrap()));
    // shear x = a + c t b, u = c b at t: x_b = c t, u_b = c
    let e = invariant_dy(js, &js.jet("u", "").unwrap()).unwrap();
    let (c, t) = (0.7, 0.4);
    let b = swnoether::PointBinding::new()
        .with("x_a", 1.0)
        .with("x_b", c * t)
        .with("y_a", 0.0)
        .with("y_b", 1.0)
        .with("u_a", 0.0)
        .with("u_b", c);
    assert!((evaluate(&e, &b).unwrap() - c).abs() < 1e-15);
}

fn random_sample(s: &mut Sampler) -> EulerianSample {
    loop {
        let mut r = || s.uniform(-2.0, 2.0);
        let smp = EulerianSample {
            x: r(),
            y: r(),
            x_a: r(),
            x_b: r(),
            y_a: r(),
            y_b: r(),
            u: r(),
            v: r(),
            u_a: r(),
            u_b: r(),
            v_a: r(),
            v_b: r(),
            geo: Some(Geostrophic { ug: r(), vg: r(), ug_a: r(), ug_b: r(), vg_a: r(), vg_b: r() }),
            h_ab: None,
        };
        if smp.delta().abs() >= 0.1 {
            return smp;
        }
    }
}

#[test]
fn pv_is_invariant_under_unimodular_relabelling() {
    let p = SWParams::new(1.2, 1.0).unwrap();
    let mut s = Sampler::new(5);
    for _ in 0..100 {
        let smp = random_sample(&mut s);
        let (m00, m01, m10) = (s.uniform(-2.0, 2.0), s.uniform(-2.0, 2.0), s.uniform(-2.0, 2.0));
        if m00.abs() < 0.2 {
            continue;
        }
        let m = [[m00, m01], [m10, (1.0 + m01 * m10) / m00]];
        let r = smp.relabel(m);
        for (a, b) in [(sw_pv(&smp, &p).unwrap(), sw_pv(&r, &p).unwrap()), (sg_pv(&smp, &p).unwrap(), sg_pv(&r, &p).unwrap())] {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} {b}");
        }
    }
}

#[test]
fn spatially_constant_velocity_has_pv_f() {
    let p = SWParams::new(0.6, 1.0).unwrap();
    let mut s = Sampler::new(8);
    for _ in 0..20 {
        let smp = EulerianSample { u_a: 0.0, u_b: 0.0, v_a: 0.0, v_b: 0.0, ..random_sample(&mut s) };
        assert!((sw_pv(&smp, &p).unwrap() - 0.6 * smp.delta()).abs() < 1e-12);
    }
}

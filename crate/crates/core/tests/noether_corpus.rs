use swnoether::noether::{
    infinitesimal_criterion, noether_current_1d_first, noether_current_1d_second, prolong, SymmetryGenerator,
};
use swnoether::symexpr::{equivalent, evaluate, parse_expr, partial, Expr, JetSpace, PointBinding};

fn js() -> JetSpace {
    JetSpace::new(&["x"], &["u"], 2).unwrap()
}

fn elastica(js: &JetSpace) -> Expr {
    parse_expr(js, "u_xx^2*(1 + u_x^2)^(-5/2)").unwrap()
}

fn generators(js: &JetSpace) -> Vec<SymmetryGenerator> {
    vec![
        SymmetryGenerator::translation(js, "x").unwrap(),
        SymmetryGenerator::shift(js, "u").unwrap(),
        SymmetryGenerator::graph_rotation(js).unwrap(),
    ]
}

#[test]
fn infinitesimal_table() {
    let js = js();
    let ux = js.jet_var("u", &["x"]).unwrap();
    let uxx = js.jet_var("u", &["x", "x"]).unwrap();
    let [a, b, th] = <[_; 3]>::try_from(generators(&js)).unwrap();
    for g in [&a, &b] {
        assert!(prolong(&js, g, &ux).unwrap().is_zero());
        assert!(prolong(&js, g, &uxx).unwrap().is_zero());
    }
    assert_eq!(prolong(&js, &th, &ux).unwrap(), parse_expr(&js, "1 + u_x^2").unwrap());
    assert_eq!(prolong(&js, &th, &uxx).unwrap(), parse_expr(&js, "3*u_x*u_xx").unwrap());
}

/// Differentiate the finite SE(2) action on `u_x`, `u_xx` at `θ = 0`.
#[test]
fn rotation_prolongation_matches_group_action() {
    let js = js();
    let th = SymmetryGenerator::graph_rotation(&js).unwrap();
    let p1 = prolong(&js, &th, &js.jet_var("u", &["x"]).unwrap()).unwrap();
    let p2 = prolong(&js, &th, &js.jet_var("u", &["x", "x"]).unwrap()).unwrap();
    let act1 = |t: f64, ux: f64| (t.sin() + t.cos() * ux) / (t.cos() - t.sin() * ux);
    let act2 = |t: f64, ux: f64, uxx: f64| uxx / (t.cos() - t.sin() * ux).powi(3);
    let eps = 1e-6;
    for (ux, uxx) in [(0.3, -1.2), (-1.1, 0.7), (1.7, 2.0)] {
        let b = PointBinding::new().with("u_x", ux).with("u_xx", uxx);
        let d1 = (act1(eps, ux) - act1(-eps, ux)) / (2.0 * eps);
        let d2 = (act2(eps, ux, uxx) - act2(-eps, ux, uxx)) / (2.0 * eps);
        assert!((evaluate(&p1, &b).unwrap() - d1).abs() < 1e-7);
        assert!((evaluate(&p2, &b).unwrap() - d2).abs() < 1e-7);
    }
}

#[test]
fn three_invariance_identities() {
    let js = js();
    let l = elastica(&js);
    assert!(partial(&js, &l, &Expr::indep("x")).unwrap().is_zero());
    assert!(partial(&js, &l, &js.jet("u", "").unwrap()).unwrap().is_zero());
    let lux = partial(&js, &l, &js.jet("u", "x").unwrap()).unwrap();
    let luxx = partial(&js, &l, &js.jet("u", "xx").unwrap()).unwrap();
    let ux = js.jet("u", "x").unwrap();
    let theta = &(&(&parse_expr(&js, "1 + u_x^2").unwrap() * &lux)
        + &(&parse_expr(&js, "3*u_x*u_xx").unwrap() * &luxx))
        - &(&ux * &l);
    assert!(equivalent(&theta, &Expr::zero(), 100).unwrap());
    for g in generators(&js) {
        let rep = infinitesimal_criterion(&js, &l, &g).unwrap();
        assert!(rep.is_invariant, "{}: {}", g.name, rep.residual);
        assert!(rep.max_abs <= 1e-9, "{}", rep.max_abs);
    }
}

#[test]
fn second_order_currents_satisfy_identity() {
    let js = js();
    let l = elastica(&js);
    for g in generators(&js) {
        let c = noether_current_1d_second(&js, &l, &g).unwrap();
        let r = c.identity_residual(&js, &l).unwrap();
        assert!(equivalent(&r, &Expr::zero(), 100).unwrap(), "{}", g.name);
    }
    let th = SymmetryGenerator::graph_rotation(&js).unwrap();
    let q = th.characteristics(&js).unwrap();
    assert_eq!(q[0], parse_expr(&js, "x + u*u_x").unwrap());
}

#[test]
fn first_order_arclength() {
    let js = js();
    let l = parse_expr(&js, "(1 + u_x^2)^(1/2)").unwrap();
    for g in generators(&js) {
        let c = noether_current_1d_first(&js, &l, &g).unwrap();
        assert!(equivalent(&c.identity_residual(&js, &l).unwrap(), &Expr::zero(), 100).unwrap());
    }
}

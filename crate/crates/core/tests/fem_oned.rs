use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swnoether::fem::{el_residual_1d, fe_noether_residual_1d, fe_noether_terms_1d, Field1d, Route};
use swnoether::noether::SymmetryGenerator;
use swnoether::symexpr::{parse_expr, JetSpace, PointBinding};

fn js() -> JetSpace {
    JetSpace::new(&["x"], &["u"], 2).unwrap().with_params(&["k"])
}

fn random_field(deg: usize, seed: u64) -> Field1d {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = vec![0.0];
    for _ in 0..7 {
        nodes.push(nodes.last().unwrap() + rng.random_range(0.05..0.3));
    }
    let n = deg * 7 + 1;
    Field1d::new(nodes, deg, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn binding() -> PointBinding {
    PointBinding::new().with("k", 0.7)
}

#[test]
fn translation_identity_for_polynomial_lagrangians() {
    let js = js();
    let l = parse_expr(&js, "u_x^2/2 + k*u^4 - u*u_x^3").unwrap();
    let g = SymmetryGenerator::translation(&js, "x").unwrap();
    for deg in [1, 2] {
        for seed in 0..5 {
            let t = fe_noether_terms_1d(&js, &l, &binding(), &random_field(deg, seed), &g).unwrap();
            assert!(t.sum.abs() <= 1e-12 * t.scale, "deg {deg} seed {seed}: {t:?}");
        }
    }
}

#[test]
fn shift_and_rotation_identities() {
    let js = js();
    let g = SymmetryGenerator::shift(&js, "u").unwrap();
    let l = parse_expr(&js, "u_x^2/2 + k*u_x^4").unwrap();
    for deg in [1, 2] {
        let t = fe_noether_terms_1d(&js, &l, &binding(), &random_field(deg, 9), &g).unwrap();
        assert!(t.sum.abs() <= 1e-12 * t.scale, "{t:?}");
    }
    let arclength = parse_expr(&js, "(1 + u_x^2)^(1/2)").unwrap();
    let rot = SymmetryGenerator::graph_rotation(&js).unwrap();
    let r = fe_noether_residual_1d(&js, &arclength, &binding(), &random_field(1, 3), &rot).unwrap();
    assert!(r.abs() < 1e-12, "{r:e}");
}

#[test]
fn non_invariant_lagrangian_leaves_integral_of_slope() {
    let js = js();
    let l = parse_expr(&js, "x*u_x").unwrap();
    let g = SymmetryGenerator::translation(&js, "x").unwrap();
    for deg in [1, 2] {
        let u = random_field(deg, 4);
        let r = fe_noether_residual_1d(&js, &l, &binding(), &u, &g).unwrap();
        let slope_integral = u.coeffs.last().unwrap() - u.coeffs[0];
        assert!((r - slope_integral).abs() < 1e-12, "{r} vs {slope_integral}");
        assert!(slope_integral.abs() > 1e-3);
    }
}

#[test]
fn constant_field_gives_zero() {
    let js = js();
    let l = parse_expr(&js, "u_x^2/2 + k*u^2").unwrap();
    let g = SymmetryGenerator::translation(&js, "x").unwrap();
    let u = Field1d::interpolate(vec![0.0, 0.3, 0.5, 1.0], 2, |_| 1.7).unwrap();
    assert!(fe_noether_residual_1d(&js, &l, &binding(), &u, &g).unwrap().abs() < 1e-14);
}

#[test]
fn el_routes_agree_and_linear_is_harmonic() {
    let js = js();
    let l = parse_expr(&js, "u_x^2/2 + k*u^4 + x*u*u_x^2").unwrap();
    for deg in [1, 2] {
        let u = random_field(deg, 12);
        let a = el_residual_1d(&js, &l, &binding(), &u, Route::ActionVariation).unwrap();
        let b = el_residual_1d(&js, &l, &binding(), &u, Route::EulerLagrange).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()), "{x} {y}");
        }
    }
    let harm = parse_expr(&js, "u_x^2/2").unwrap();
    let u = Field1d::interpolate(vec![0.0, 0.2, 0.45, 0.7, 1.0], 1, |x| 3.0 * x - 1.0).unwrap();
    let r = el_residual_1d(&js, &harm, &binding(), &u, Route::ActionVariation).unwrap();
    assert!(r[1..r.len() - 1].iter().all(|v| v.abs() < 1e-14));
}

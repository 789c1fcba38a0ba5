use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swnoether::fem::{current_for, fe_noether_terms, fe_pv_residual, DiscreteProblem, NoetherTerms, StreamFunction};
use swnoether::mesh::{perturb_mesh, structured_rect_mesh, FEField, FESpace, QuadratureRule, TimeSlabs};
use swnoether::swmodels::{salmon_lagrangian, sg_lagrangian, GaugeChoice, SWParams};

fn random_setup(sg: bool, deg: usize, periodic: bool, seed: u64) -> (DiscreteProblem, Vec<FEField>) {
    let m = perturb_mesh(&structured_rect_mesh(1.0, 1.0, 4, 4, periodic).unwrap(), 0.025, seed).unwrap();
    let sp = Arc::new(FESpace::new(Arc::new(m), deg).unwrap());
    let params = SWParams::new(0.8, 1.1).unwrap();
    let spec = if sg { sg_lagrangian(params, GaugeChoice::symmetric()) } else { salmon_lagrangian(params, GaugeChoice::symmetric()) }.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut field = |s: f64| (0..sp.n_dofs()).map(|_| s * rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let knots: Vec<Vec<Vec<f64>>> = (0..3).map(|_| vec![field(0.01), field(0.01), field(0.4), field(0.4)]).collect();
    let q = QuadratureRule::for_degree(deg).unwrap();
    let p = DiscreteProblem::new(spec, sp, TimeSlabs::uniform(0.0, 0.2, 2).unwrap(), q, knots[0].clone()).unwrap();
    let mut fields = p.initial_fields();
    for (w, f) in fields.iter_mut().enumerate() {
        f.knots = knots.iter().map(|k| k[w].clone()).collect();
    }
    (p, fields)
}

fn assert_identity(t: &NoetherTerms, rel: f64, what: &str) {
    assert!(t.sum.abs() <= rel * t.scale().max(1e-300), "{what}: {t:?}");
    assert!(t.scale() > 0.0, "{what}: all terms vanish");
}

fn phis(p: &DiscreteProblem) -> Vec<StreamFunction> {
    let d = p.spaces[0].n_dofs() / 2;
    vec![StreamFunction::Linear([0.3, -0.7, 1.1]), StreamFunction::Hat(d), StreamFunction::PatchBump(d)]
}

#[test]
fn pv_identity_holds_for_arbitrary_salmon_coefficients() {
    for periodic in [true, false] {
        for seed in [1, 2] {
            let (p, fields) = random_setup(false, 1, periodic, seed);
            for phi in phis(&p) {
                for n in 0..2 {
                    let t = fe_pv_residual(&p, &fields, n, &phi).unwrap();
                    assert_identity(&t, 1e-11, &format!("periodic={periodic} {phi:?}"));
                }
            }
        }
    }
}

#[test]
fn momentum_and_rotation_identities_hold() {
    for periodic in [true, false] {
        let (p, fields) = random_setup(false, 1, periodic, 7);
        for name in ["momentum-a", "momentum-b", "angular"] {
            let cur = current_for(&p, name).unwrap();
            let t = fe_noether_terms(&p, &fields, 1, &cur, None).unwrap();
            assert_identity(&t, 1e-11, name);
        }
    }
}

#[test]
fn energy_identity_holds_to_time_quadrature() {
    let (p, fields) = random_setup(false, 1, true, 3);
    let t = fe_noether_terms(&p, &fields, 0, &current_for(&p, "energy").unwrap(), None).unwrap();
    assert_identity(&t, 1e-9, "energy");
}

#[test]
fn sg_and_p2_identities_hold_to_quadrature() {
    for (sg, deg) in [(true, 1), (false, 2), (true, 2)] {
        let (p, fields) = random_setup(sg, deg, true, 4);
        let t = fe_pv_residual(&p, &fields, 0, &StreamFunction::PatchBump(3)).unwrap();
        assert_identity(&t, 1e-7, &format!("sg={sg} deg={deg}"));
    }
}

#[test]
fn constant_stream_function_gives_zero_terms() {
    let (p, fields) = random_setup(false, 1, true, 5);
    let t = fe_pv_residual(&p, &fields, 0, &StreamFunction::Constant(2.5)).unwrap();
    assert_eq!((t.volume, t.boundary, t.jump, t.sum), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn linear_stream_function_is_b_momentum() {
    for periodic in [true, false] {
        let (p, fields) = random_setup(false, 1, periodic, 6);
        let pv = fe_pv_residual(&p, &fields, 1, &StreamFunction::Linear([0.0, 1.0, 0.0])).unwrap();
        let mb = fe_noether_terms(&p, &fields, 1, &current_for(&p, "momentum-b").unwrap(), None).unwrap();
        // ξ = (φ_b, -φ_a) = (0, -1) is minus the b-translation.
        for (x, y) in [(pv.volume, mb.volume), (pv.boundary, mb.boundary), (pv.jump, mb.jump)] {
            assert!((x + y).abs() <= 1e-12 * mb.scale(), "{pv:?} {mb:?}");
        }
    }
}

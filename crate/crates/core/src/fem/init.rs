use std::f64::consts::PI;
use std::sync::Arc;

use crate::mesh::FESpace;
use crate::swmodels::{LagrangianSpec, Model};

use super::problem::DirichletFn;
use super::FemError;

/// Initial data. Position fields start at the identity map `x = a, y = b`
/// except for [`InitialCondition::Coefficients`].
#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Rest,
    /// Solid-body rotation with angular velocity `omega` about the centre of
    /// a bounded domain. A periodic domain admits no rotation; there the
    /// velocity is `omega (-Ly/2π sin(2π(b - b_c)/Ly), Lx/2π sin(2π(a - a_c)/Lx))`,
    /// which agrees with the rotation near the centre.
    RigidRotation { omega: f64 },
    /// `u = c (b - b_mid)` on bounded domains, `u = c sin(2π b / Ly)` on
    /// periodic ones.
    Shear { c: f64 },
    /// Raw coefficients per dependent variable, positions as displacements.
    Coefficients(Vec<Vec<f64>>),
}

fn domain(space: &FESpace) -> ([f64; 2], [f64; 2]) {
    if let Some(p) = space.mesh().periodicity() {
        return (p.origin, [p.lx, p.ly]);
    }
    let v = space.mesh().vertices();
    let lo = v.iter().fold([f64::INFINITY; 2], |m, p| [m[0].min(p[0]), m[1].min(p[1])]);
    let hi = v.iter().fold([f64::NEG_INFINITY; 2], |m, p| [m[0].max(p[0]), m[1].max(p[1])]);
    (lo, [hi[0] - lo[0], hi[1] - lo[1]])
}

/// Centre of the bounding box of the mesh.
pub fn domain_centre(space: &FESpace) -> [f64; 2] {
    let (o, l) = domain(space);
    [o[0] + l[0] / 2.0, o[1] + l[1] / 2.0]
}

/// Initial coefficients for every dependent variable of `spec`. Velocities
/// are only set for the Salmon model; the geostrophic velocities of a flat
/// free surface vanish, so SG data other than `Coefficients` is at rest.
pub fn initial_coefficients(spec: &LagrangianSpec, spaces: &[Arc<FESpace>], ic: &InitialCondition) -> Result<Vec<Vec<f64>>, FemError> {
    let deps: Vec<String> = spec.js.dependent().iter().map(|d| d.to_string()).collect();
    if deps.len() != spaces.len() {
        return Err(FemError::Invalid(format!("{} spaces for {} dependent variables", spaces.len(), deps.len())));
    }
    if let InitialCondition::Coefficients(c) = ic {
        if c.len() != deps.len() || c.iter().zip(spaces).any(|(c, s)| c.len() != s.n_dofs()) {
            return Err(FemError::Invalid("initial coefficient sizes do not match the spaces".into()));
        }
        return Ok(c.clone());
    }
    let periodic = spaces[0].mesh().is_periodic();
    let (origin, len) = domain(&spaces[0]);
    let centre = domain_centre(&spaces[0]);
    let velocity = |p: [f64; 2]| -> [f64; 2] {
        match *ic {
            InitialCondition::RigidRotation { omega } if periodic => [
                -omega * len[1] / (2.0 * PI) * (2.0 * PI * (p[1] - centre[1]) / len[1]).sin(),
                omega * len[0] / (2.0 * PI) * (2.0 * PI * (p[0] - centre[0]) / len[0]).sin(),
            ],
            InitialCondition::RigidRotation { omega } => [-omega * (p[1] - centre[1]), omega * (p[0] - centre[0])],
            InitialCondition::Shear { c } if periodic => [c * (2.0 * PI * (p[1] - origin[1]) / len[1]).sin(), 0.0],
            InitialCondition::Shear { c } => [c * (p[1] - centre[1]), 0.0],
            _ => [0.0, 0.0],
        }
    };
    Ok(deps
        .iter()
        .zip(spaces)
        .map(|(d, s)| match (spec.model, d.as_str()) {
            (Model::Salmon, "u") => s.interpolate(&|p| velocity(p)[0]),
            (Model::Salmon, "v") => s.interpolate(&|p| velocity(p)[1]),
            _ => vec![0.0; s.n_dofs()],
        })
        .collect())
}

/// Exact `(x, y, u, v)` of a solid-body rotation of a flat layer: each
/// parcel keeps its initial velocity `omega J (a - c)` rotated inertially,
/// `x = c + (I + omega K(t) J)(a - c)` with `K(t) = ∫_0^t R(-f s) ds`, and the
/// depth stays spatially uniform.
pub fn rotation_exact(f: f64, omega: f64, centre: [f64; 2], a: [f64; 2], t: f64) -> [f64; 4] {
    let d = [a[0] - centre[0], a[1] - centre[1]];
    let jd = [-d[1], d[0]];
    let (s, c) = (f * t).sin_cos();
    let (k11, k12) = if f == 0.0 { (t, 0.0) } else { (s / f, (1.0 - c) / f) };
    let kj = [k11 * jd[0] + k12 * jd[1], -k12 * jd[0] + k11 * jd[1]];
    let vel = [c * jd[0] + s * jd[1], -s * jd[0] + c * jd[1]];
    [centre[0] + d[0] + omega * kj[0], centre[1] + d[1] + omega * kj[1], omega * vel[0], omega * vel[1]]
}

/// Boundary positions of [`rotation_exact`]; velocities stay free.
pub fn rotation_dirichlet(f: f64, omega: f64, centre: [f64; 2]) -> Arc<DirichletFn> {
    Arc::new(move |w, p, t| (w < 2).then(|| rotation_exact(f, omega, centre, p, t)[w]))
}

//! Triangulated label domain, time slabs, continuous Lagrange spaces and
//! quadrature rules.

mod io;
mod label_mesh;
mod quadrature;
mod space;

pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};
pub use label_mesh::{perturb_mesh, structured_rect_mesh, Face, LabelMesh, Periodicity, EDGE_VERTS};
pub use quadrature::{IntervalRule, QuadratureRule, TriangleRule};
pub use space::{basis, eval_field, BasisValues, Deriv, ElementGeometry, FEField, FESpace, Lift, TimeSlabs};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("invalid mesh: {0}")]
    Invalid(String),
    #[error("triangle {triangle} has non-positive area {area}")]
    InvertedTriangle { triangle: usize, area: f64 },
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("mesh parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Io(String),
    #[error("unsupported polynomial degree {0}")]
    Degree(usize),
    #[error("time {t} is outside the available slabs")]
    OutOfSlab { t: f64 },
    #[error("invalid time knots: {0}")]
    Knots(String),
    #[error("quadrature: {0}")]
    Quadrature(String),
}

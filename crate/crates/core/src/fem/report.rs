use std::path::Path;

use serde::Serialize;

use crate::mesh::FEField;
use crate::swmodels::{salmon_lagrangian, sg_lagrangian, GaugeChoice, Model};

use super::identity::{conserved_quantity_series, current_for, fe_noether_terms, StreamFunction};
use super::problem::DiscreteProblem;
use super::FemError;

/// One tracked quantity on one slab.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub slab: usize,
    pub t0: f64,
    pub t1: f64,
    pub quantity: String,
    pub volume: f64,
    pub boundary: f64,
    pub jump: f64,
    pub sum: f64,
    /// `∫ A^t` at the end of the slab.
    pub conserved: f64,
}

/// Per-slab Noether identity terms for every tracked symmetry.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NoetherResidualReport {
    pub rows: Vec<ReportRow>,
    /// `∫ A^t` at every knot, per quantity, in row order of first appearance.
    pub series: Vec<(String, Vec<f64>)>,
}

impl NoetherResidualReport {
    /// Largest `|sum|` relative to the largest term or the conserved
    /// quantity itself, whichever is bigger, over all rows.
    pub fn worst_relative_sum(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| {
                let s = r.volume.abs().max(r.boundary.abs()).max(r.jump.abs()).max(r.conserved.abs());
                if s == 0.0 {
                    0.0
                } else {
                    r.sum.abs() / s
                }
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |Q_k - Q_0|` for a quantity.
    pub fn drift(&self, quantity: &str) -> Option<f64> {
        let (_, s) = self.series.iter().find(|(q, _)| q == quantity)?;
        Some(s.iter().fold(0.0f64, |m, v| m.max((v - s[0]).abs())))
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), FemError> {
        let mut w = csv::Writer::from_path(path).map_err(|e| FemError::Io(e.to_string()))?;
        for r in &self.rows {
            w.serialize(r).map_err(|e| FemError::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| FemError::Io(e.to_string()))
    }
}

/// Problem whose Lagrangian differs from `p`'s by a total time derivative
/// and whose density for translation along `axis` is periodic: `R = f y,
/// P = 0` for `a`, `P = f x, R = 0` for `b`. Same discrete solution.
pub fn momentum_gauge(p: &DiscreteProblem, axis: &str) -> Result<DiscreteProblem, FemError> {
    let (big_p, big_r) = match axis {
        "a" => ("0", "f*y"),
        "b" => ("f*x", "0"),
        _ => return Err(FemError::Invalid(format!("no momentum along `{axis}`"))),
    };
    let spec = match p.spec.model {
        Model::Salmon => salmon_lagrangian(p.spec.params, GaugeChoice::custom(big_p, big_r, "", ""))?,
        Model::Sg => sg_lagrangian(p.spec.params, GaugeChoice::custom(big_p, big_r, "u_g/(2*f)", "v_g/(2*f)"))?,
        Model::Custom => return Ok(p.clone()),
    };
    p.with_lagrangian(spec)
}

fn phi_label(phi: &StreamFunction) -> String {
    match phi {
        StreamFunction::Constant(c) => format!("pv:const({c})"),
        StreamFunction::Linear(c) => format!("pv:linear({},{},{})", c[0], c[1], c[2]),
        StreamFunction::Hat(d) => format!("pv:hat({d})"),
        StreamFunction::PatchBump(d) => format!("pv:bump({d})"),
        StreamFunction::TensorBump { centre, radius } => {
            format!("pv:tensor({},{};{},{})", centre[0], centre[1], radius[0], radius[1])
        }
        StreamFunction::Bubble { corners } => format!(
            "pv:bubble({},{};{},{};{},{})",
            corners[0][0], corners[0][1], corners[1][0], corners[1][1], corners[2][0], corners[2][1]
        ),
    }
}

/// Identity terms and conserved series for the named symmetries (`energy`,
/// `momentum-a`, `momentum-b`, `angular`) and one relabelling per stream
/// function. Momenta of a Salmon or SG problem are measured in
/// [`momentum_gauge`].
pub fn noether_report(p: &DiscreteProblem, fields: &[FEField], symmetries: &[String], phis: &[StreamFunction]) -> Result<NoetherResidualReport, FemError> {
    let nslab = fields.iter().map(|f| f.knots.len()).min().unwrap_or(1).saturating_sub(1);
    let mut jobs: Vec<(String, DiscreteProblem, String, Option<&StreamFunction>)> = Vec::new();
    for s in symmetries {
        let q = match s.as_str() {
            "momentum-a" => momentum_gauge(p, "a")?,
            "momentum-b" => momentum_gauge(p, "b")?,
            _ => p.clone(),
        };
        jobs.push((s.clone(), q, s.clone(), None));
    }
    for phi in phis {
        jobs.push((phi_label(phi), p.clone(), "pv".into(), Some(phi)));
    }
    let mut report = NoetherResidualReport::default();
    for (label, q, gen, phi) in &jobs {
        let cur = current_for(q, gen)?;
        let series = conserved_quantity_series(q, fields, &cur, *phi)?;
        for n in 0..nslab {
            let t = fe_noether_terms(q, fields, n, &cur, *phi)?;
            let (t0, t1) = q.slabs.slab(n);
            report.rows.push(ReportRow {
                slab: n,
                t0,
                t1,
                quantity: label.clone(),
                volume: t.volume,
                boundary: t.boundary,
                jump: t.jump,
                sum: t.sum,
                conserved: series[n + 1],
            });
        }
        report.series.push((label.clone(), series));
    }
    Ok(report)
}

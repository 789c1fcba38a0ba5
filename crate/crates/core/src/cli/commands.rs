use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::fem::{
    domain_centre, initial_coefficients, noether_report, rotation_dirichlet, solve_all, weak_pv_limit, DiscreteProblem,
    ManufacturedFlow, NoetherResidualReport, Solution,
};
use crate::mesh::{structured_rect_mesh, FESpace, Lift, QuadratureRule, TimeSlabs};
use crate::noether::{criterion_residual, noether_current_swe, pv_from_momenta, SymmetryGenerator};
use crate::swmodels::{
    rewrite_gauge, salmon_lagrangian, sg_lagrangian, sg_pv_expr, sw_pv_expr, GaugeChoice, LagrangianSpec, Model,
};
use crate::symexpr::{equivalent, Expr, JetSpace};

use super::config::{parse_phi, RunConfig};
use super::CliError;

const TRIALS: usize = 100;

/// Text report of a subcommand and whether its verification passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub passed: bool,
}

fn sym(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn is_zero(e: &Expr) -> Result<bool, CliError> {
    equivalent(e, &Expr::zero(), TRIALS).map_err(sym)
}

/// Jet space with a stream function `phi(a, b)` and the relabelling it generates.
fn relabelling(js: &JetSpace) -> Result<(JetSpace, SymmetryGenerator), CliError> {
    let js = js.clone().with_function("phi", &["a", "b"]);
    let psi = js.apply("phi", vec![Expr::indep("a"), Expr::indep("b")]).map_err(sym)?;
    let g = SymmetryGenerator::relabelling(&js, &psi).map_err(sym)?;
    Ok((js, g))
}

fn generators(spec: &LagrangianSpec) -> Result<Vec<(JetSpace, SymmetryGenerator)>, CliError> {
    let mut out: Vec<_> = spec.standard_generators().map_err(sym)?.into_iter().map(|g| (spec.js.clone(), g)).collect();
    out.push(relabelling(&spec.js)?);
    Ok(out)
}

/// Euler-Lagrange equations, characteristics, currents, PV density and
/// invariance residuals. Fails verification when a listed symmetry does not
/// leave the Lagrangian invariant.
pub fn cmd_derive(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let spec = config.lagrangian()?;
    let js = &spec.js;
    let l = &spec.lagrangian;
    let mut r = String::new();
    let mut passed = true;
    writeln!(r, "model {} gauge {} f {} g {}", config.model.kind, config.model.gauge, config.model.f, config.model.g).unwrap();
    writeln!(r, "L = {l}").unwrap();
    writeln!(r, "\n[euler-lagrange]").unwrap();
    for (d, e) in spec.euler_system().map_err(sym)? {
        writeln!(r, "E_{d} = {e}").unwrap();
    }
    for (gjs, g) in generators(&spec)? {
        writeln!(r, "\n[{}]", g.name).unwrap();
        let res = rewrite_gauge(&criterion_residual(&gjs, l, &g).map_err(sym)?);
        let invariant = is_zero(&res)?;
        writeln!(r, "invariance residual = {res}").unwrap();
        if !invariant {
            writeln!(r, "not invariant").unwrap();
            passed = false;
            continue;
        }
        let c = noether_current_swe(&gjs, l, &g).map_err(sym)?;
        for (d, q) in gjs.dependent().iter().zip(&c.characteristics) {
            writeln!(r, "Q_{d} = {q}").unwrap();
        }
        for s in ["a", "b", "t"] {
            if let Some(a) = c.component(s) {
                writeln!(r, "A_{s} = {}", rewrite_gauge(a)).unwrap();
            }
        }
    }
    writeln!(r, "\n[potential-vorticity]").unwrap();
    match pv_from_momenta(js, l) {
        Ok(pv) => writeln!(r, "D_b M_a - D_a M_b = {}", rewrite_gauge(&pv)).unwrap(),
        Err(e) => {
            writeln!(r, "unavailable: {e}").unwrap();
            passed = false;
        }
    }
    r.push_str(if passed { "\nall symmetries hold\n" } else { "\nsome symmetries fail\n" });
    Ok(Outcome { report: r, passed })
}

struct Checks {
    text: String,
    passed: bool,
}

impl Checks {
    fn record(&mut self, name: &str, ok: bool) {
        writeln!(self.text, "{} {name}", if ok { "PASS" } else { "FAIL" }).unwrap();
        self.passed &= ok;
    }
}

/// Invariance, Noether identity, gauge-independence and PV checks for the
/// configured model; passes iff every check holds.
pub fn cmd_check(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let spec = config.lagrangian()?;
    let l = &spec.lagrangian;
    let mut c = Checks { text: String::new(), passed: true };
    for (gjs, g) in generators(&spec)? {
        let res = rewrite_gauge(&criterion_residual(&gjs, l, &g).map_err(sym)?);
        let invariant = is_zero(&res)?;
        c.record(&format!("invariance {}", g.name), invariant);
        if invariant {
            let cur = noether_current_swe(&gjs, l, &g).map_err(sym)?;
            let id = rewrite_gauge(&cur.identity_residual(&gjs, l).map_err(sym)?);
            c.record(&format!("noether identity {}", g.name), is_zero(&id)?);
        }
    }
    if spec.model != Model::Custom {
        let build = |gauge: GaugeChoice| match spec.model {
            Model::Salmon => salmon_lagrangian(spec.params, gauge),
            _ => sg_lagrangian(spec.params, gauge),
        };
        let own = spec.euler_system().map_err(sym)?;
        for gauge in [GaugeChoice::symmetric(), GaugeChoice::x_only()] {
            let id = gauge.id.clone();
            let other = build(gauge).map_err(sym)?.euler_system().map_err(sym)?;
            let mut same = true;
            for ((_, a), (_, b)) in own.iter().zip(&other) {
                same &= is_zero(&(a - b))?;
            }
            c.record(&format!("euler-lagrange gauge independence vs {id}"), same);
        }
        let omega = match spec.model {
            Model::Salmon => sw_pv_expr(&spec.js, "u", "v"),
            _ => sg_pv_expr(&spec.js),
        }
        .map_err(sym)?;
        let pv = rewrite_gauge(&pv_from_momenta(&spec.js, l).map_err(sym)?);
        c.record("pv from momenta equals -pv density", is_zero(&(&pv + &omega))?);
    }
    c.record("relabelling invariance", spec.relabelling_invariant().map_err(sym)?);
    let summary = if c.passed { "all checks pass\n" } else { "some checks fail\n" };
    c.text.push_str(summary);
    Ok(Outcome { report: c.text, passed: c.passed })
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

#[derive(Serialize)]
struct SolverRow {
    slab: usize,
    iterations: usize,
    initial_residual: f64,
    final_residual: f64,
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    for r in rows {
        w.serialize(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Full field values at every dof and knot: `knot,t,dof,a,b,<fields>`.
fn write_states(path: &Path, p: &DiscreteProblem, sol: &Solution) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut header: Vec<String> = ["knot", "t", "dof", "a", "b"].map(String::from).to_vec();
    header.extend(p.deps());
    w.write_record(&header).map_err(io)?;
    let pts = p.spaces[0].dof_points();
    let same = p.spaces.iter().all(|s| s.n_dofs() == pts.len());
    if !same {
        return Err(CliError::Config("snapshots need one space for every field".into()));
    }
    for (k, &t) in p.slabs.knots().iter().enumerate() {
        for (d, pt) in pts.iter().enumerate() {
            let mut rec = vec![k.to_string(), format!("{t:?}"), d.to_string(), format!("{:?}", pt[0]), format!("{:?}", pt[1])];
            for f in &sol.fields {
                let lift = match f.lift {
                    Lift::None => 0.0,
                    Lift::A => pt[0],
                    Lift::B => pt[1],
                };
                rec.push(format!("{:?}", f.knots[k][d] + lift));
            }
            w.write_record(&rec).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Builds the problem of a run: bounded meshes with `walls` get the boundary
/// positions of the exact solid-body rotation (at rest unless the initial
/// condition is a Salmon rotation).
pub fn build_problem(config: &RunConfig) -> Result<DiscreteProblem, CliError> {
    let spec = config.lagrangian()?;
    let space = config.space()?;
    let spaces = vec![space.clone(); spec.js.dependent().len()];
    let deps: Vec<String> = spec.js.dependent().iter().map(|d| d.to_string()).collect();
    let ic = config.initial_condition(&deps, &vec![space.n_dofs(); deps.len()])?;
    let init = initial_coefficients(&spec, &spaces, &ic)?;
    let quad = QuadratureRule::for_degree(config.mesh.degree).map_err(sym)?;
    let (f, model) = (spec.params.f, spec.model);
    let mut p = DiscreteProblem::new(spec, space.clone(), config.slabs()?, quad, init)?;
    if config.initial.walls && !space.mesh().is_periodic() {
        let omega = if config.initial.kind == "rigid-rotation" && model == Model::Salmon { config.initial.omega } else { 0.0 };
        p = p.with_dirichlet(rotation_dirichlet(f, omega, domain_centre(&space)));
    }
    Ok(p)
}

/// A finished run: the problem, its solution and the Noether report.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub problem: DiscreteProblem,
    pub solution: Solution,
    pub report: NoetherResidualReport,
    /// Requested symmetries left out because the gauge does not admit them.
    pub skipped: Vec<String>,
}

/// Marches every slab and evaluates the configured diagnostics.
pub fn simulate(config: &RunConfig) -> Result<RunResult, CliError> {
    config.validate()?;
    let problem = build_problem(config)?;
    let solution = solve_all(&problem, &config.solver_config())?;
    let has_rotation = problem.spec.standard_generators().map_err(sym)?.iter().any(|g| g.name == "rotation");
    let (symmetries, skipped): (Vec<String>, Vec<String>) =
        config.diagnostics.symmetries.iter().cloned().partition(|s| s != "angular" || has_rotation);
    let phis = config.stream_functions(&problem.spaces[0])?;
    let report = noether_report(&problem, &solution.fields, &symmetries, &phis)?;
    Ok(RunResult { problem, solution, report, skipped })
}

/// Marches every slab, then writes `states.csv`, `solver.csv` and
/// `noether_report.csv`. Fails verification when an identity sum or the
/// energy drift exceeds its configured bound.
pub fn cmd_run(config: &RunConfig) -> Result<Outcome, CliError> {
    let RunResult { problem: p, solution: sol, report, skipped } = simulate(config)?;
    let mut r = String::new();
    for s in &skipped {
        writeln!(r, "skipping {s}: the gauge does not admit it").unwrap();
    }
    let dir = config.output_dir();
    create_dir(&dir)?;
    report.write_csv(&dir.join("noether_report.csv"))?;
    write_states(&dir.join("states.csv"), &p, &sol)?;
    let rows: Vec<SolverRow> = sol
        .reports
        .iter()
        .map(|s| SolverRow {
            slab: s.slab,
            iterations: s.iterations,
            initial_residual: s.residual_history[0],
            final_residual: *s.residual_history.last().unwrap(),
        })
        .collect();
    write_rows(&dir.join("solver.csv"), &rows)?;
    let iters: usize = sol.reports.iter().map(|s| s.iterations).sum();
    writeln!(r, "{} slabs, {} Newton iterations", sol.reports.len(), iters).unwrap();
    for (q, _) in &report.series {
        writeln!(r, "drift {q} = {:.3e}", report.drift(q).unwrap_or(0.0)).unwrap();
    }
    let worst = report.worst_relative_sum();
    let mut passed = worst <= config.diagnostics.identity_tol;
    writeln!(r, "worst relative identity sum = {worst:.3e} (bound {:.1e})", config.diagnostics.identity_tol).unwrap();
    if config.diagnostics.energy_drift > 0.0 {
        if let Some(d) = report.drift("energy") {
            let ok = d <= config.diagnostics.energy_drift;
            writeln!(r, "energy drift {d:.3e} (bound {:.1e})", config.diagnostics.energy_drift).unwrap();
            passed &= ok;
        }
    }
    writeln!(r, "wrote {}", dir.display()).unwrap();
    r.push_str(if passed { "run verified\n" } else { "run failed verification\n" });
    Ok(Outcome { report: r, passed })
}

/// One refinement level of a weak-PV convergence study.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergeRow {
    pub level: usize,
    pub nx: usize,
    pub h: f64,
    pub dt: f64,
    pub t: f64,
    pub rate: f64,
    pub rate_exact: f64,
    pub residual: f64,
    /// Empirical order against the previous level; `n/a` when either
    /// residual is at roundoff or on the first level.
    pub order: String,
}

/// Residuals below this are roundoff and carry no order.
const ROUNDOFF: f64 = 1e-14;

/// Weak-PV residual of the interpolated manufactured flow on nested bounded
/// unit-square meshes, `base_nx 2^l` cells per side and `nx/2` slabs up to
/// `horizon`, measured at the middle knot. Writes `converge.csv`. Passes when
/// the residual decreases strictly with order at least 1 on the finest pair,
/// or stays at roundoff for the rest flow.
pub fn cmd_converge(config: &RunConfig) -> Result<Outcome, CliError> {
    config.validate()?;
    let c = &config.converge;
    if c.levels < 3 {
        return Err(CliError::Config(format!("converge needs at least 3 levels, got {}", c.levels)));
    }
    if config.model.kind == "custom" {
        return Err(CliError::Config("converge needs the salmon or sg model".into()));
    }
    let spec = config.lagrangian()?;
    let rest = c.flow == "rest";
    let mut rows: Vec<ConvergeRow> = Vec::new();
    for level in 0..c.levels {
        let nx = c.base_nx << level;
        let mesh = structured_rect_mesh(1.0, 1.0, nx, nx, false).map_err(sym)?;
        let space = Arc::new(FESpace::new(Arc::new(mesh), config.mesh.degree).map_err(sym)?);
        let phi = parse_phi(&c.phi, &space)?;
        let slabs = TimeSlabs::uniform(0.0, c.horizon, nx / 2).map_err(sym)?;
        let quad = QuadratureRule::for_degree(config.mesh.degree).map_err(sym)?;
        let zeros = vec![vec![0.0; space.n_dofs()]; spec.js.dependent().len()];
        let p = DiscreteProblem::new(spec.clone(), space, slabs, quad, zeros)?;
        let flow = if rest { ManufacturedFlow::polynomial(&p, 0, 1)? } else { ManufacturedFlow::polynomial(&p, c.eps_num, c.eps_den)? };
        let fields = flow.interpolate(&p);
        let knot = nx / 4;
        let w = weak_pv_limit(&p, &fields, knot, &phi, Some(&flow))?;
        let h = 1.0 / nx as f64;
        let order = match rows.last() {
            Some(prev) if prev.residual > ROUNDOFF && w.residual > ROUNDOFF => {
                format!("{:.4}", (prev.residual / w.residual).ln() / (prev.h / h).ln())
            }
            _ => "n/a".into(),
        };
        rows.push(ConvergeRow {
            level,
            nx,
            h,
            dt: c.horizon / (nx / 2) as f64,
            t: p.slabs.knots()[knot],
            rate: w.rate,
            rate_exact: w.rate_exact.unwrap_or(0.0),
            residual: w.residual,
            order,
        });
    }
    let dir = config.output_dir();
    create_dir(&dir)?;
    write_rows(&dir.join("converge.csv"), &rows)?;
    let mut r = String::new();
    writeln!(r, "level nx residual order").unwrap();
    for row in &rows {
        writeln!(r, "{} {} {:.3e} {}", row.level, row.nx, row.residual, row.order).unwrap();
    }
    let passed = if rest {
        rows.iter().all(|row| row.residual <= ROUNDOFF)
    } else {
        let decreasing = rows.windows(2).all(|w| w[1].residual < w[0].residual);
        let finest: Option<f64> = rows.last().and_then(|row| row.order.parse().ok());
        writeln!(r, "strictly decreasing: {decreasing}").unwrap();
        decreasing && finest.is_some_and(|o| o >= 1.0)
    };
    writeln!(r, "wrote {}", dir.join("converge.csv").display()).unwrap();
    r.push_str(if passed { "study verified\n" } else { "study failed verification\n" });
    Ok(Outcome { report: r, passed })
}

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fem::{domain_centre, InitialCondition, SolverConfig, StreamFunction};
use crate::mesh::{perturb_mesh, read_mesh, structured_rect_mesh, FESpace, LabelMesh, TimeSlabs};
use crate::swmodels::{custom_lagrangian, salmon_lagrangian, sg_lagrangian, GaugeChoice, LagrangianSpec, SWParams};

use super::CliError;

/// Everything a subcommand needs, read from a sectioned TOML file. Every key
/// has a default; `--show-config` prints them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    pub solver: SolverSection,
    pub diagnostics: DiagnosticsConfig,
    pub converge: ConvergeConfig,
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// `salmon`, `sg` or `custom`.
    pub kind: String,
    pub f: f64,
    pub g: f64,
    /// `symmetric`, `x-only` or `opaque`.
    pub gauge: String,
    /// Lagrangian text over `(a, b, t) -> (x, y, extra...)` for `custom`.
    pub lagrangian: String,
    pub extra_deps: Vec<String>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: "salmon".into(),
            f: 1.0,
            g: 1.0,
            gauge: "symmetric".into(),
            lagrangian: String::new(),
            extra_deps: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// Mesh file; overrides the structured mesh when non-empty.
    pub file: String,
    pub lx: f64,
    pub ly: f64,
    pub nx: usize,
    pub ny: usize,
    pub periodic: bool,
    /// Largest vertex displacement per coordinate.
    pub perturbation: f64,
    pub seed: u64,
    pub degree: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { file: String::new(), lx: 1.0, ly: 1.0, nx: 8, ny: 8, periodic: true, perturbation: 0.0, seed: 0, degree: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub slabs: usize,
    pub horizon: f64,
    /// Explicit knots; override `slabs` and `horizon` when non-empty.
    pub knots: Vec<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { slabs: 10, horizon: 1.0, knots: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    /// `rest`, `rigid-rotation`, `shear` or `file`.
    pub kind: String,
    pub omega: f64,
    pub c: f64,
    /// CSV with one column per dependent variable and one row per dof;
    /// positions as displacements.
    pub file: String,
    /// Pin boundary positions to the exact rotation on bounded meshes.
    pub walls: bool,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig { kind: "rest".into(), omega: 0.1, c: 0.1, file: String::new(), walls: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub backtrack: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::default();
        SolverSection { tol: s.tol, max_iter: s.max_iter, backtrack: s.backtrack }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Any of `energy`, `momentum-a`, `momentum-b`, `angular`.
    pub symmetries: Vec<String>,
    /// Stream functions: `const:C`, `linear:C0,C1,C2`, `hat:DOF`, `bump:DOF`,
    /// `tensor:CA,CB,RA,RB`, `bubble:A0,B0,A1,B1,A2,B2`. `DOF` may be
    /// `centre` for the vertex nearest the domain centre.
    pub phi: Vec<String>,
    /// Largest accepted `|sum|` relative to the largest identity term.
    pub identity_tol: f64,
    /// Largest accepted energy drift; `0` disables the check.
    pub energy_drift: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            symmetries: ["energy", "momentum-a", "momentum-b", "angular"].map(String::from).to_vec(),
            phi: vec!["hat:centre".into(), "bump:centre".into()],
            identity_tol: 1e-11,
            energy_drift: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeConfig {
    pub levels: usize,
    /// Cells per side of the coarsest bounded unit-square mesh; a multiple of 4.
    pub base_nx: usize,
    pub horizon: f64,
    /// `manufactured` or `rest`.
    pub flow: String,
    /// Deformation amplitude `num/den` of the manufactured flow.
    pub eps_num: i64,
    pub eps_den: i64,
    pub phi: String,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        ConvergeConfig {
            levels: 3,
            base_nx: 4,
            horizon: 0.5,
            flow: "manufactured".into(),
            eps_num: 1,
            eps_den: 5,
            phi: "bubble:0.25,0.25,0.5,0.25,0.5,0.5".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "out".into() }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    /// Parse TOML text; paths are resolved against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        let mut c: RunConfig = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        if let Some(base) = base {
            for f in [&mut c.mesh.file, &mut c.initial.file] {
                if !f.is_empty() && Path::new(f.as_str()).is_relative() {
                    *f = base.join(&*f).to_string_lossy().into_owned();
                }
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent()).map_err(|e| match e {
            CliError::Config(m) => invalid(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Range and existence checks that do not build anything expensive.
    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        if !["salmon", "sg", "custom"].contains(&m.kind.as_str()) {
            return Err(invalid(format!("model.kind `{}` is not salmon, sg or custom", m.kind)));
        }
        if !(m.g.is_finite() && m.f.is_finite()) || m.g == 0.0 {
            return Err(invalid("model.g must be finite and nonzero, model.f finite"));
        }
        if m.kind == "sg" && m.f == 0.0 {
            return Err(invalid("model.f must be nonzero for sg"));
        }
        if m.kind == "custom" && m.lagrangian.trim().is_empty() {
            return Err(invalid("model.lagrangian is required for custom"));
        }
        if GaugeChoice::by_id(&m.gauge).is_none() {
            return Err(invalid(format!("model.gauge `{}` is not symmetric, x-only or opaque", m.gauge)));
        }
        let me = &self.mesh;
        if me.file.is_empty() {
            if me.nx == 0 || me.ny == 0 || !(me.lx > 0.0 && me.ly > 0.0) {
                return Err(invalid("mesh needs nx, ny >= 1 and positive lx, ly"));
            }
        } else if !Path::new(&me.file).is_file() {
            return Err(invalid(format!("mesh.file `{}` does not exist", me.file)));
        }
        if !(me.perturbation >= 0.0 && me.perturbation.is_finite()) {
            return Err(invalid("mesh.perturbation must be finite and non-negative"));
        }
        if me.degree != 1 && me.degree != 2 {
            return Err(invalid("mesh.degree must be 1 or 2"));
        }
        if self.time.knots.is_empty() && (self.time.slabs == 0 || !(self.time.horizon > 0.0)) {
            return Err(invalid("time needs slabs >= 1 and a positive horizon"));
        }
        if !["rest", "rigid-rotation", "shear", "file"].contains(&self.initial.kind.as_str()) {
            return Err(invalid(format!("initial.kind `{}` is not rest, rigid-rotation, shear or file", self.initial.kind)));
        }
        if self.initial.kind == "file" && !Path::new(&self.initial.file).is_file() {
            return Err(invalid(format!("initial.file `{}` does not exist", self.initial.file)));
        }
        self.solver_config().validate().map_err(|e| invalid(e.to_string()))?;
        for s in &self.diagnostics.symmetries {
            if !["energy", "momentum-a", "momentum-b", "angular"].contains(&s.as_str()) {
                return Err(invalid(format!("unknown symmetry `{s}`")));
            }
        }
        if !(self.diagnostics.identity_tol > 0.0) || !(self.diagnostics.energy_drift >= 0.0) {
            return Err(invalid("diagnostics tolerances must be positive"));
        }
        let c = &self.converge;
        if c.base_nx == 0 || c.base_nx % 4 != 0 || !(c.horizon > 0.0) || c.eps_den == 0 {
            return Err(invalid("converge needs base_nx a positive multiple of 4, a positive horizon, eps_den != 0"));
        }
        if !["manufactured", "rest"].contains(&c.flow.as_str()) {
            return Err(invalid(format!("converge.flow `{}` is not manufactured or rest", c.flow)));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<SWParams, CliError> {
        SWParams::new(self.model.f, self.model.g).map_err(|e| invalid(e.to_string()))
    }

    pub fn gauge(&self) -> GaugeChoice {
        GaugeChoice::by_id(&self.model.gauge).unwrap_or_default()
    }

    pub fn lagrangian(&self) -> Result<LagrangianSpec, CliError> {
        let params = self.params()?;
        let spec = match self.model.kind.as_str() {
            "salmon" => salmon_lagrangian(params, self.gauge()),
            "sg" => sg_lagrangian(params, self.gauge()),
            _ => {
                let extra: Vec<&str> = self.model.extra_deps.iter().map(String::as_str).collect();
                custom_lagrangian(params, &extra, &self.model.lagrangian)
            }
        };
        spec.map_err(|e| invalid(format!("model: {e}")))
    }

    pub fn build_mesh(&self) -> Result<LabelMesh, CliError> {
        let me = &self.mesh;
        let m = if me.file.is_empty() {
            structured_rect_mesh(me.lx, me.ly, me.nx, me.ny, me.periodic)
        } else {
            read_mesh(Path::new(&me.file))
        }
        .map_err(|e| invalid(format!("mesh: {e}")))?;
        if me.perturbation > 0.0 {
            return perturb_mesh(&m, me.perturbation, me.seed).map_err(|e| invalid(format!("mesh: {e}")));
        }
        Ok(m)
    }

    pub fn space(&self) -> Result<Arc<FESpace>, CliError> {
        let m = self.build_mesh()?;
        FESpace::new(Arc::new(m), self.mesh.degree).map(Arc::new).map_err(|e| invalid(format!("mesh: {e}")))
    }

    pub fn slabs(&self) -> Result<TimeSlabs, CliError> {
        let t = &self.time;
        let s = if t.knots.is_empty() { TimeSlabs::uniform(0.0, t.horizon, t.slabs) } else { TimeSlabs::new(t.knots.clone()) };
        s.map_err(|e| invalid(format!("time: {e}")))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { tol: self.solver.tol, max_iter: self.solver.max_iter, backtrack: self.solver.backtrack }
    }

    pub fn initial_condition(&self, deps: &[String], n_dofs: &[usize]) -> Result<InitialCondition, CliError> {
        Ok(match self.initial.kind.as_str() {
            "rest" => InitialCondition::Rest,
            "rigid-rotation" => InitialCondition::RigidRotation { omega: self.initial.omega },
            "shear" => InitialCondition::Shear { c: self.initial.c },
            _ => InitialCondition::Coefficients(read_coefficients(Path::new(&self.initial.file), deps, n_dofs)?),
        })
    }

    pub fn stream_functions(&self, space: &FESpace) -> Result<Vec<StreamFunction>, CliError> {
        self.diagnostics.phi.iter().map(|s| parse_phi(s, space)).collect()
    }

    pub fn output_dir(&self) -> PathBuf {
        PathBuf::from(&self.output.dir)
    }
}

fn read_coefficients(path: &Path, deps: &[String], n_dofs: &[usize]) -> Result<Vec<Vec<f64>>, CliError> {
    let err = |m: String| invalid(format!("{}: {m}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| err(e.to_string()))?;
    let header: Vec<String> = r.headers().map_err(|e| err(e.to_string()))?.iter().map(String::from).collect();
    let cols: Vec<usize> = deps
        .iter()
        .map(|d| header.iter().position(|h| h == d).ok_or_else(|| err(format!("no column `{d}`"))))
        .collect::<Result<_, _>>()?;
    let mut out = vec![Vec::new(); deps.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        for (w, &c) in cols.iter().enumerate() {
            let Some(cell) = rec.get(c).filter(|s| !s.trim().is_empty()) else { continue };
            let v: f64 = cell.trim().parse().map_err(|_| err(format!("line {}: `{cell}` is not a number", line + 2)))?;
            out[w].push(v);
        }
    }
    for ((d, c), &n) in deps.iter().zip(&out).zip(n_dofs) {
        if c.len() != n {
            return Err(err(format!("column `{d}` has {} values, the space has {n} dofs", c.len())));
        }
    }
    Ok(out)
}

fn numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| invalid(format!("`{what}` needs {n} comma-separated numbers")))?;
    if v.len() != n {
        return Err(invalid(format!("`{what}` needs {n} comma-separated numbers")));
    }
    Ok(v)
}

/// Vertex dof nearest to the domain centre.
fn centre_dof(space: &FESpace) -> usize {
    let c = domain_centre(space);
    let m = space.mesh();
    let (mut best, mut dist) = (0, f64::INFINITY);
    for (v, p) in m.vertices().iter().enumerate() {
        let d = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
        if d < dist {
            (best, dist) = (m.vertex_dof()[v], d);
        }
    }
    best
}

/// Parse one stream-function selector.
pub fn parse_phi(s: &str, space: &FESpace) -> Result<StreamFunction, CliError> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let dof = || -> Result<usize, CliError> {
        let d = if arg.trim() == "centre" {
            centre_dof(space)
        } else {
            arg.trim().parse().map_err(|_| invalid(format!("`{s}`: expected a vertex dof or `centre`")))?
        };
        if d >= space.mesh().n_vertex_dofs() {
            return Err(invalid(format!("`{s}`: vertex dof {d} out of range")));
        }
        Ok(d)
    };
    Ok(match kind.trim() {
        "const" => StreamFunction::Constant(numbers(arg, 1, s)?[0]),
        "linear" => {
            let v = numbers(arg, 3, s)?;
            StreamFunction::Linear([v[0], v[1], v[2]])
        }
        "hat" => StreamFunction::Hat(dof()?),
        "bump" => StreamFunction::PatchBump(dof()?),
        "tensor" => {
            let v = numbers(arg, 4, s)?;
            StreamFunction::TensorBump { centre: [v[0], v[1]], radius: [v[2], v[3]] }
        }
        "bubble" => {
            let v = numbers(arg, 6, s)?;
            StreamFunction::Bubble { corners: [[v[0], v[1]], [v[2], v[3]], [v[4], v[5]]] }
        }
        _ => return Err(invalid(format!("unknown stream function `{s}`"))),
    })
}

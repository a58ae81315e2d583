//! Scenario configuration: a TOML document with the sections `domain`,
//! `spaces`, `material`, `regularization`, `loads`, `initial`, `time`,
//! `solver` and `output`. Unknown keys are rejected; omitted keys take the
//! defaults below and are written back into the run manifest.

use std::path::Path;
use std::sync::Arc;

use eulerswell::grid::BoxDomain;
use eulerswell::material::{
    AffineCoef, ContentEnergy, Dissipation, MaterialModel, Mobility, MobilityKind, OgdenEnergy,
    Regularization, SwellingLaw,
};
use eulerswell::solver::{InitialData, Loads, NewtonOptions, Scenario, TimeGrid};
use eulerswell::tensor::Tensor2;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::expr::Expr;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub domain: DomainConfig,
    #[serde(default)]
    pub spaces: SpacesConfig,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub regularization: RegularizationConfig,
    #[serde(default)]
    pub loads: LoadsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    pub time: TimeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Box `[lower, upper]` in metres.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default)]
    pub periodic: Vec<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SpacesConfig {
    pub velocity_degree: usize,
    pub content_degree: usize,
    /// Gauss points per axis; omitted picks the default for the degrees.
    pub quad_points: Option<usize>,
}

impl Default for SpacesConfig {
    fn default() -> Self {
        Self {
            velocity_degree: 8,
            content_degree: 8,
            quad_points: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SwellingKind {
    Constant,
    Affine,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum MobilityLaw {
    Constant,
    InverseDet,
    AffineContent,
}

/// Ogden family coefficients. Energies in Pa, viscosities in Pa·s,
/// mobility in m³·s/kg. Pairs `[a, b]` mean `a + b·z`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct MaterialConfig {
    pub family: String,
    pub swelling: SwellingKind,
    pub beta: f64,
    pub f1: [f64; 2],
    pub f2: [f64; 2],
    pub f3: [f64; 2],
    pub bulk: f64,
    pub kappa: f64,
    pub h0: f64,
    pub h1: f64,
    pub kappa_h: f64,
    pub eta: [f64; 2],
    pub eta2: f64,
    pub nu: f64,
    pub p: f64,
    pub mobility: f64,
    pub mobility_law: MobilityLaw,
    pub mobility_slope: f64,
    pub mobility_floor: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        let m = MaterialModel::<f64>::default_instance(2);
        let e = m.energy;
        let d = m.dissipation;
        Self {
            family: "ogden".into(),
            swelling: SwellingKind::Affine,
            beta: match m.swelling {
                SwellingLaw::Affine { beta } => beta,
                SwellingLaw::Constant => 0.0,
            },
            f1: [e.f1.a, e.f1.b],
            f2: [e.f2.a, e.f2.b],
            f3: [e.f3.a, e.f3.b],
            bulk: e.bulk,
            kappa: e.kappa,
            h0: e.h.h0,
            h1: e.h.h1,
            kappa_h: e.h.kappa_h,
            eta: [d.eta0, d.eta1],
            eta2: d.eta2,
            nu: d.nu,
            p: d.p,
            mobility: m.mobility.m0,
            mobility_law: MobilityLaw::Constant,
            mobility_slope: 0.0,
            mobility_floor: m.mobility.floor,
        }
    }
}

impl MaterialConfig {
    pub fn build(&self, dim: usize) -> Result<MaterialModel<f64>, CliError> {
        if self.family != "ogden" {
            return Err(CliError::config(
                "material.family",
                format!("unknown family {:?}, expected \"ogden\"", self.family),
            ));
        }
        let coef = |c: [f64; 2]| AffineCoef { a: c[0], b: c[1] };
        let model = MaterialModel {
            dim,
            swelling: match self.swelling {
                SwellingKind::Constant => SwellingLaw::Constant,
                SwellingKind::Affine => SwellingLaw::Affine { beta: self.beta },
            },
            energy: OgdenEnergy {
                f1: coef(self.f1),
                f2: coef(self.f2),
                f3: coef(self.f3),
                bulk: self.bulk,
                kappa: self.kappa,
                h: ContentEnergy {
                    h0: self.h0,
                    h1: self.h1,
                    kappa_h: self.kappa_h,
                },
            },
            dissipation: Dissipation {
                eta0: self.eta[0],
                eta1: self.eta[1],
                eta2: self.eta2,
                nu: self.nu,
                p: self.p,
            },
            mobility: Mobility {
                m0: self.mobility,
                kind: match self.mobility_law {
                    MobilityLaw::Constant => MobilityKind::Constant,
                    MobilityLaw::InverseDet => MobilityKind::InverseDet,
                    MobilityLaw::AffineContent => MobilityKind::AffineContent {
                        slope: self.mobility_slope,
                    },
                },
                floor: self.mobility_floor,
            },
        };
        model
            .validate()
            .map_err(|e| crate::error::from_core(e, 0, 0.0))?;
        Ok(model)
    }
}

/// `epsilon` (dimensionless), `yosida_k` (Pa), `eps_f`, `r`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RegularizationConfig {
    pub epsilon: f64,
    pub yosida_k: f64,
    pub eps_f: f64,
    pub r: f64,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            yosida_k: 1e3,
            eps_f: 0.0,
            r: 3.0,
        }
    }
}

/// Expressions in `t, x, y, z`: `gravity` (m/s²) and `traction` (Pa) have
/// one entry per axis, `influx` is scalar; `transfer` is `ϰ ≥ 0`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct LoadsConfig {
    pub gravity: Option<Vec<String>>,
    pub traction: Option<Vec<String>>,
    pub influx: Option<String>,
    pub transfer: f64,
}

/// Expressions in `x, y, z`: velocity (m/s), deformation gradient rows,
/// content, density (kg/m³).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub velocity: Option<Vec<String>>,
    pub deformation: Option<Vec<Vec<String>>>,
    pub content: String,
    pub density: String,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            velocity: None,
            deformation: None,
            content: "0.5".into(),
            density: "1".into(),
        }
    }
}

/// Times in seconds; `min_dt` defaults to `dt / 1024`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    pub min_dt: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub atol: f64,
    pub rtol: f64,
    pub max_iter: usize,
    pub reuse_jacobian: bool,
    pub cfl: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let n = NewtonOptions::<f64>::default();
        Self {
            atol: n.atol,
            rtol: n.rtol,
            max_iter: n.max_iter,
            reuse_jacobian: true,
            cfl: 0.5,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Snapshot every this many steps; 0 writes only the first and last.
    pub snapshot_every: usize,
    /// Lattice points per axis of the field snapshots.
    pub lattice: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            snapshot_every: 0,
            lattice: 65,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let value: toml::Value =
            toml::from_str(text).map_err(|e| CliError::config("<document>", e.to_string()))?;
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn dim(&self) -> usize {
        self.domain.lower.len()
    }

    /// Builds the solver scenario, checking every key that the core does
    /// not check itself.
    pub fn scenario(&self) -> Result<Scenario<f64>, CliError> {
        let d = self.dim();
        if !(1..=3).contains(&d) {
            return Err(CliError::config(
                "domain.lower",
                format!("dimension {d} not in 1..=3"),
            ));
        }
        if self.domain.upper.len() != d {
            return Err(CliError::config(
                "domain.upper",
                format!("expected {d} entries"),
            ));
        }
        let periodic = if self.domain.periodic.is_empty() {
            vec![false; d]
        } else {
            self.domain.periodic.clone()
        };
        if periodic.len() != d {
            return Err(CliError::config(
                "domain.periodic",
                format!("expected {d} entries"),
            ));
        }
        let domain = BoxDomain::new(&self.domain.lower, &self.domain.upper, &periodic)
            .map_err(|e| crate::error::from_core(e, 0, 0.0))?;
        let material = self.material.build(d)?;
        let r = &self.regularization;
        let regularization = Regularization {
            eps: r.epsilon,
            yosida_k: r.yosida_k,
            eps_f: r.eps_f,
            r: r.r,
        };
        let loads = self.loads.build(d)?;
        let initial = self.initial.build(d)?;
        let t = &self.time;
        let time = TimeGrid {
            t_end: t.t_end,
            dt: t.dt,
            min_dt: t.min_dt.unwrap_or(t.dt / 1024.0),
        };
        let s = &self.solver;
        if s.max_iter == 0 {
            return Err(CliError::config("solver.max_iter", "must be >= 1"));
        }
        if !(s.atol > 0.0) {
            return Err(CliError::config("solver.atol", "must be > 0"));
        }
        if !(s.rtol > 0.0) {
            return Err(CliError::config("solver.rtol", "must be > 0"));
        }
        if self.output.lattice < 2 {
            return Err(CliError::config("output.lattice", "must be >= 2"));
        }
        let sp = &self.spaces;
        if sp.velocity_degree == 0 || sp.content_degree == 0 {
            return Err(CliError::config(
                "spaces.velocity_degree",
                "degrees must be >= 1",
            ));
        }
        let scenario = Scenario {
            domain,
            velocity_degree: sp.velocity_degree,
            content_degree: sp.content_degree,
            quad_points: sp.quad_points,
            material,
            regularization,
            loads,
            initial,
            time,
            newton: NewtonOptions {
                atol: s.atol,
                rtol: s.rtol,
                max_iter: s.max_iter,
                reuse_jacobian: s.reuse_jacobian,
            },
            cfl: s.cfl,
        };
        scenario
            .validate()
            .map_err(|e| crate::error::from_core(e, 0, 0.0))?;
        Ok(scenario)
    }
}

fn vector_exprs(key: &str, src: &[String], d: usize) -> Result<Vec<Expr>, CliError> {
    if src.len() != d {
        return Err(CliError::config(
            key,
            format!("expected {d} components, got {}", src.len()),
        ));
    }
    src.iter()
        .enumerate()
        .map(|(i, s)| Expr::parse(&format!("{key}[{i}]"), s))
        .collect()
}

fn vector_fn(e: Vec<Expr>) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] + Send + Sync {
    move |t, x| {
        let mut out = [0.0; 3];
        for (o, e) in out.iter_mut().zip(&e) {
            *o = e.eval(t, x);
        }
        out
    }
}

impl LoadsConfig {
    fn build(&self, d: usize) -> Result<Loads<f64>, CliError> {
        if !(self.transfer >= 0.0) {
            return Err(CliError::config("loads.transfer", "must be >= 0"));
        }
        let mut loads = Loads {
            transfer: self.transfer,
            ..Default::default()
        };
        if let Some(g) = &self.gravity {
            loads.gravity = Some(Arc::new(vector_fn(vector_exprs("loads.gravity", g, d)?)));
        }
        if let Some(f) = &self.traction {
            loads.traction = Some(Arc::new(vector_fn(vector_exprs("loads.traction", f, d)?)));
        }
        if let Some(h) = &self.influx {
            let e = Expr::parse("loads.influx", h)?;
            loads.influx = Some(Arc::new(move |t, x| e.eval(t, x)));
        }
        Ok(loads)
    }
}

fn steady(key: &str, src: &str) -> Result<Expr, CliError> {
    let e = Expr::parse(key, src)?;
    if !e.is_steady() {
        return Err(CliError::config(key, "initial data cannot depend on t"));
    }
    Ok(e)
}

impl InitialConfig {
    fn build(&self, d: usize) -> Result<InitialData<f64>, CliError> {
        let mut init = InitialData::rest(d, 0.5, 1.0);
        if let Some(v) = &self.velocity {
            let e = vector_exprs("initial.velocity", v, d)?;
            if !e.iter().all(Expr::is_steady) {
                return Err(CliError::config(
                    "initial.velocity",
                    "initial data cannot depend on t",
                ));
            }
            let f = vector_fn(e);
            init.velocity = Arc::new(move |x| f(0.0, x));
        }
        if let Some(rows) = &self.deformation {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(CliError::config(
                    "initial.deformation",
                    format!("expected a {d}x{d} array"),
                ));
            }
            let mut es = Vec::with_capacity(d * d);
            for (i, row) in rows.iter().enumerate() {
                for (j, s) in row.iter().enumerate() {
                    es.push(steady(&format!("initial.deformation[{i}][{j}]"), s)?);
                }
            }
            init.deformation =
                Arc::new(move |x| Tensor2::from_fn(d, |i, j| es[i * d + j].eval(0.0, x)));
        }
        let z = steady("initial.content", &self.content)?;
        init.content = Arc::new(move |x| z.eval(0.0, x));
        let rho = steady("initial.density", &self.density)?;
        init.density = Arc::new(move |x| rho.eval(0.0, x));
        Ok(init)
    }
}

//! Run orchestration: stepping, ledger, snapshots and the manifest.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use eulerswell::audit::{
    record, regularization_activity, write_row, LedgerHistory, LEDGER_COLUMNS,
};
use eulerswell::solver::{Simulator, StepReport};
use serde::Serialize;

use crate::config::Config;
use crate::error::{from_core, CliError};
use crate::snapshot;

/// A simulator together with its ledger and per-step bookkeeping.
pub struct Session {
    pub sim: Simulator<f64>,
    pub ledger: LedgerHistory<f64>,
    pub reports: Vec<StepReport<f64>>,
    eps: f64,
    inactive: bool,
    max_rho_defect: f64,
}

impl Session {
    pub fn new(config: &Config) -> Result<Self, CliError> {
        let scenario = config.scenario()?;
        let eps = scenario.regularization.eps;
        let sim = Simulator::new(scenario).map_err(|e| from_core(e, 0, 0.0))?;
        let mut s = Self {
            sim,
            ledger: LedgerHistory::default(),
            reports: Vec::new(),
            eps,
            inactive: true,
            max_rho_defect: 0.0,
        };
        s.observe()?;
        Ok(s)
    }

    fn observe(&mut self) -> Result<(), CliError> {
        let state = self.sim.state();
        let row = record(self.sim.discretization(), self.sim.scenario(), state)
            .map_err(|e| from_core(e, self.sim.steps_taken(), state.t))?;
        self.ledger.push(row);
        self.inactive &= regularization_activity(state, self.eps).inactive();
        self.max_rho_defect = self.max_rho_defect.max(rho_defect(state));
        Ok(())
    }

    /// One accepted step towards `t_stop`.
    pub fn step_until(&mut self, t_stop: f64) -> Result<&StepReport<f64>, CliError> {
        let rep = self.sim.step_until(t_stop).map_err(|e| {
            let t = self.sim.state().t;
            from_core(e, self.sim.steps_taken() + 1, t)
        })?;
        self.reports.push(rep);
        self.observe()?;
        Ok(self.reports.last().expect("just pushed"))
    }

    /// Steps to `t_stop`, calling `each` after every accepted step.
    pub fn run_until(
        &mut self,
        t_stop: f64,
        mut each: impl FnMut(&Session) -> Result<(), CliError>,
    ) -> Result<(), CliError> {
        while !self.sim.finished_at(t_stop) {
            self.step_until(t_stop)?;
            each(self)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> Summary {
        let rows = &self.ledger.rows;
        let fold = |f: fn(&eulerswell::audit::EnergyLedger<f64>) -> f64, init: f64, max: bool| {
            rows.iter()
                .map(f)
                .fold(init, |a, b| if max { a.max(b) } else { a.min(b) })
        };
        let e0 = rows.first().map(|r| r.energy()).unwrap_or(0.0);
        let mut monotone = true;
        for w in rows.windows(2) {
            if w[1].energy() > w[0].energy() {
                monotone = false;
            }
        }
        Summary {
            t_final: self.sim.state().t,
            steps: self.reports.len(),
            halvings: self.reports.iter().map(|r| r.halvings).sum(),
            max_newton_momentum: self
                .reports
                .iter()
                .map(|r| r.momentum.iterations)
                .max()
                .unwrap_or(0),
            max_newton_diffusion: self
                .reports
                .iter()
                .map(|r| r.diffusion.iterations)
                .max()
                .unwrap_or(0),
            min_det_f: fold(|r| r.min_det_f, f64::INFINITY, false),
            max_abs_f: fold(|r| r.max_abs_f, 0.0, true),
            max_mass_residual: fold(|r| r.mass_residual, 0.0, true),
            max_rho_defect: self.max_rho_defect,
            max_z_overshoot: fold(|r| r.z_overshoot, 0.0, true),
            energy_initial: e0,
            energy_final: rows.last().map(|r| r.energy()).unwrap_or(0.0),
            energy_monotone: monotone,
            balance_residual: if rows.is_empty() {
                0.0
            } else {
                self.ledger.balance_residual(rows.len() - 1)
            },
            regularization_inactive: self.inactive,
            traction_normal_violation: self.sim.traction_normal_violation(),
        }
    }
}

/// `max |ρ − ρ_R / det F|` over the nodes.
pub fn rho_defect(state: &eulerswell::solver::FieldState<f64>) -> f64 {
    let tr = &state.transport;
    tr.f.iter()
        .zip(&tr.rho)
        .zip(&tr.rho_r)
        .map(|((f, r), rr)| (r - rr / f.det()).abs())
        .fold(0.0, f64::max)
}

/// Final invariants of a run.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Summary {
    pub t_final: f64,
    pub steps: usize,
    pub halvings: usize,
    pub max_newton_momentum: usize,
    pub max_newton_diffusion: usize,
    pub min_det_f: f64,
    pub max_abs_f: f64,
    pub max_mass_residual: f64,
    pub max_rho_defect: f64,
    pub max_z_overshoot: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub energy_monotone: bool,
    pub balance_residual: f64,
    pub regularization_inactive: bool,
    pub traction_normal_violation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub version: String,
    pub config_path: Option<String>,
    pub config: Config,
    pub started: String,
    pub finished: String,
    pub status: String,
    pub exit_code: i32,
    pub diagnostic: Option<String>,
    pub root_cause: Option<String>,
    pub summary: Option<Summary>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub until: Option<f64>,
    pub snapshot_every: Option<usize>,
    pub config_path: Option<PathBuf>,
}

/// Result of [`run`]; the manifest is already on disk.
pub struct RunOutcome {
    pub manifest: Manifest,
    pub error: Option<CliError>,
    pub session: Option<Session>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.manifest.exit_code
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Runs `config` writing `ledger.csv`, snapshots and `manifest.json` into
/// `out`. The manifest is written whatever happens.
pub fn run(config: &Config, out: &Path, opts: &RunOptions) -> RunOutcome {
    let started = now();
    let mut session = None;
    let result = fs::create_dir_all(out)
        .map_err(|e| CliError::io(out, e))
        .and_then(|_| execute(config, out, opts, &mut session));
    let error = result.err();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_path: opts.config_path.as_ref().map(|p| p.display().to_string()),
        config: config.clone(),
        started,
        finished: now(),
        status: match &error {
            None => "completed",
            Some(CliError::Config { .. }) => "config_error",
            Some(CliError::Solver { .. }) => "solver_failure",
            Some(CliError::Io { .. }) => "io_error",
        }
        .to_string(),
        exit_code: error.as_ref().map_or(0, CliError::exit_code),
        diagnostic: error.as_ref().map(|e| e.to_string()),
        root_cause: error
            .as_ref()
            .and_then(|e| e.root_cause())
            .map(|e| e.to_string()),
        summary: session.as_ref().map(Session::summary),
    };
    let path = out.join("manifest.json");
    let written = fs::create_dir_all(out).and_then(|_| {
        fs::write(
            &path,
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )
    });
    let error = match (error, written) {
        (Some(e), _) => Some(e),
        (None, Err(e)) => Some(CliError::io(path, e)),
        (None, Ok(())) => None,
    };
    RunOutcome {
        manifest,
        error,
        session,
    }
}

fn execute(
    config: &Config,
    out: &Path,
    opts: &RunOptions,
    slot: &mut Option<Session>,
) -> Result<(), CliError> {
    let session = slot.insert(Session::new(config)?);
    let t_stop = opts.until.unwrap_or(config.time.t_end);
    let every = opts.snapshot_every.unwrap_or(config.output.snapshot_every);
    let lattice = config.output.lattice;
    let ledger_path = out.join("ledger.csv");
    let file = fs::File::create(&ledger_path).map_err(|e| CliError::io(&ledger_path, e))?;
    let mut csv = BufWriter::new(file);
    let io = |e| CliError::io(&ledger_path, e);
    writeln!(csv, "{}", LEDGER_COLUMNS.join(",")).map_err(io)?;
    write_row(&mut csv, &session.ledger.rows[0]).map_err(io)?;
    snapshots(session, out, 0, lattice)?;
    let mut last_snap = 0;
    let result = session.run_until(t_stop, |s| {
        let n = s.reports.len();
        write_row(&mut csv, s.ledger.rows.last().expect("row")).map_err(io)?;
        if every > 0 && n % every == 0 {
            snapshots(s, out, n, lattice)?;
            last_snap = n;
        }
        Ok(())
    });
    csv.flush().map_err(io)?;
    let n = session.reports.len();
    if n != last_snap {
        snapshots(session, out, n, lattice)?;
    }
    result
}

fn snapshots(s: &Session, out: &Path, index: usize, lattice: usize) -> Result<(), CliError> {
    for snap in snapshot::sample(s.sim.discretization(), s.sim.state(), lattice)? {
        snapshot::write(out, index, &snap)?;
    }
    Ok(())
}

//! Parameter sweeps: one sub-run per value, then a comparison table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::config::Config;
use crate::error::CliError;
use crate::run::{run, RunOptions, Summary};

/// Environment variable holding the number of sweep workers.
pub const WORKERS_ENV: &str = "EULERSWELL_WORKERS";

pub const PARAMS: [&str; 5] = ["epsilon", "yosida_k", "dt", "degree", "eps_F"];

/// Copy of `base` with `param` set to `value`.
pub fn apply(base: &Config, param: &str, value: f64) -> Result<Config, CliError> {
    let mut c = base.clone();
    match param {
        "epsilon" => c.regularization.epsilon = value,
        "yosida_k" => c.regularization.yosida_k = value,
        "eps_F" => c.regularization.eps_f = value,
        "dt" => {
            c.time.dt = value;
            if let Some(m) = c.time.min_dt {
                c.time.min_dt = Some(m.min(value));
            }
        }
        "degree" => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(CliError::config(
                    "sweep.values",
                    format!("degree {value} is not a positive integer"),
                ));
            }
            c.spaces.velocity_degree = value as usize;
            c.spaces.content_degree = value as usize;
        }
        other => {
            return Err(CliError::config(
                "sweep.param",
                format!(
                    "unknown parameter {other:?}, expected one of {}",
                    PARAMS.join(", ")
                ),
            ))
        }
    }
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub value: f64,
    pub exit_code: i32,
    pub diagnostic: Option<String>,
    pub summary: Option<Summary>,
    /// Largest relative difference of any ledger entry from the first
    /// sub-run, when both ledgers have the same time levels.
    pub ledger_delta: Option<f64>,
    pub rows: Vec<[f64; 14]>,
}

/// `|a − b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_delta(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Largest [`relative_delta`] over matching ledger entries; `None` when the
/// row counts or times differ.
pub fn ledger_delta(a: &[[f64; 14]], b: &[[f64; 14]]) -> Option<f64> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| x[0] != y[0]) {
        return None;
    }
    Some(
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| relative_delta(*p, *q)))
            .fold(0.0, f64::max),
    )
}

pub fn workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn sweep(
    base: &Config,
    param: &str,
    values: &[f64],
    out: &Path,
) -> Result<Vec<SweepEntry>, CliError> {
    let configs = values
        .iter()
        .map(|&v| apply(base, param, v))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers())
        .build()
        .map_err(|e| CliError::config(WORKERS_ENV, e.to_string()))?;
    let mut entries: Vec<SweepEntry> = pool.install(|| {
        configs
            .par_iter()
            .zip(values.par_iter())
            .map(|(cfg, &value)| {
                let dir = out.join(format!("{param}_{value:e}"));
                let o = run(cfg, &dir, &RunOptions::default());
                SweepEntry {
                    value,
                    exit_code: o.exit_code(),
                    diagnostic: o.manifest.diagnostic.clone(),
                    summary: o.manifest.summary.clone(),
                    ledger_delta: None,
                    rows: o
                        .session
                        .map(|s| s.ledger.rows.iter().map(|r| r.values()).collect())
                        .unwrap_or_default(),
                }
            })
            .collect()
    });
    let first = entries.first().map(|e| e.rows.clone()).unwrap_or_default();
    for e in &mut entries {
        e.ledger_delta = ledger_delta(&first, &e.rows);
    }
    let table = table(param, &entries);
    fs::write(out.join("sweep.csv"), &table).map_err(|e| CliError::io(out.join("sweep.csv"), e))?;
    Ok(entries)
}

/// Comparison table: one CSV line per value, with ratios to the previous
/// value for the balance residual and the content overshoot.
pub fn table(param: &str, entries: &[SweepEntry]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{param},exit,steps,energy_final,balance_residual,residual_ratio,z_overshoot,overshoot_ratio,max_ledger_delta"
    );
    let mut prev: Option<&Summary> = None;
    for e in entries {
        let ratio = |a: f64, b: f64| {
            if b != 0.0 {
                format!("{:.6e}", a / b)
            } else {
                String::new()
            }
        };
        match &e.summary {
            Some(sm) => {
                let (rr, or) = match prev {
                    Some(p) => (
                        ratio(p.balance_residual, sm.balance_residual),
                        ratio(p.max_z_overshoot, sm.max_z_overshoot),
                    ),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(
                    s,
                    "{:e},{},{},{:.16e},{:.16e},{},{:.16e},{},{}",
                    e.value,
                    e.exit_code,
                    sm.steps,
                    sm.energy_final,
                    sm.balance_residual,
                    rr,
                    sm.max_z_overshoot,
                    or,
                    e.ledger_delta
                        .map(|d| format!("{d:.6e}"))
                        .unwrap_or_default()
                );
                prev = Some(sm);
            }
            None => {
                let _ = writeln!(s, "{:e},{},,,,,,,", e.value, e.exit_code);
                prev = None;
            }
        }
    }
    s
}

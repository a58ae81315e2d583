//! Energy ledger, conservation residuals and regularization activity.
//!
//! Every term uses the solver's quadrature. The stored energy is the
//! regularized one the scheme actually evolves: `χ_ε φ̂(F,z)` plus the
//! Yosida potential of `z`; on a compliant run with `z ∈ [0,1]` it equals
//! `∫φ̂(F,z)`.

use std::io::{self, Write};

use crate::error::Result;
use crate::material::{cutoff_chi, det_floor, yosida_potential};
use crate::scalar::Real;
use crate::solver::{tangential_traction, Discretization, FieldState, Scenario};

/// One ledger row; fields in CSV column order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyLedger<T> {
    pub time: T,
    pub kinetic: T,
    pub stored: T,
    pub dissip_visc: T,
    pub dissip_diff: T,
    pub dissip_bdry: T,
    pub power_gravity: T,
    pub power_traction: T,
    pub power_influx: T,
    pub mass_residual: T,
    pub min_det_f: T,
    pub max_abs_f: T,
    pub z_overshoot: T,
    pub chi_active: T,
}

pub const LEDGER_COLUMNS: [&str; 14] = [
    "time",
    "kinetic",
    "stored",
    "dissip_visc",
    "dissip_diff",
    "dissip_bdry",
    "power_gravity",
    "power_traction",
    "power_influx",
    "mass_residual",
    "min_detF",
    "max_abs_F",
    "z_overshoot",
    "chi_active",
];

impl<T: Real> EnergyLedger<T> {
    pub fn values(&self) -> [T; 14] {
        [
            self.time,
            self.kinetic,
            self.stored,
            self.dissip_visc,
            self.dissip_diff,
            self.dissip_bdry,
            self.power_gravity,
            self.power_traction,
            self.power_influx,
            self.mass_residual,
            self.min_det_f,
            self.max_abs_f,
            self.z_overshoot,
            self.chi_active,
        ]
    }

    /// `kinetic + stored`.
    pub fn energy(&self) -> T {
        self.kinetic + self.stored
    }

    pub fn dissipation(&self) -> T {
        self.dissip_visc + self.dissip_diff + self.dissip_bdry
    }

    pub fn power(&self) -> T {
        self.power_gravity + self.power_traction + self.power_influx
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Evaluates every ledger term on `state` with the loads at `state.t`.
///
/// Weak-form manufactured sources are booked as powers: the momentum one
/// under gravity, the content one under influx.
pub fn record<T: Real>(
    disc: &Discretization<T>,
    scenario: &Scenario<T>,
    state: &FieldState<T>,
) -> Result<EnergyLedger<T>> {
    let d = disc.dim();
    let t = state.t;
    let grid = &disc.grid;
    let mat = &scenario.material;
    let reg = &scenario.regularization;
    let loads = &scenario.loads;
    let tr = &state.transport;
    let vt = &disc.vtab;
    let v = vt.vector_values(&state.v);
    let gv = vt.vector_grads(&state.v);
    let need_g2 = mat.dissipation.nu != T::zero() || loads.momentum_source.is_some();
    let g2 = if need_g2 {
        Some(vt.vector_grad2(&state.v))
    } else {
        None
    };
    let z = disc.ztab.scalar_values(&state.z);
    let gmu = disc.ztab.scalar_grads(&state.mu);
    let mut row = EnergyLedger {
        time: t,
        kinetic: T::zero(),
        stored: T::zero(),
        dissip_visc: T::zero(),
        dissip_diff: T::zero(),
        dissip_bdry: T::zero(),
        power_gravity: T::zero(),
        power_traction: T::zero(),
        power_influx: T::zero(),
        mass_residual: tr.mass_residual(),
        min_det_f: tr.min_det_f(),
        max_abs_f: tr.max_abs_f(),
        z_overshoot: T::zero(),
        chi_active: T::zero(),
    };
    let mut active = 0usize;
    for (q, &w) in grid.weights().iter().enumerate() {
        let x = &grid.points()[q];
        let f = &tr.f[q];
        let v2 = (0..d).fold(T::zero(), |s, a| s + v[q][a] * v[q][a]);
        row.kinetic = row.kinetic + w * T::half() * tr.rho[q] * v2;
        let rp = mat.regularized(f, z[q], reg.eps)?;
        if rp.chi < T::one() {
            active += 1;
        }
        row.stored = row.stored + w * (rp.phi + yosida_potential(z[q], reg.yosida_k));
        let e = gv[q].sym();
        let gq = g2.as_ref().map(|g| g[q].sym12());
        let visc = match &gq {
            Some(g) => mat.dissipation.dissipation_rate(z[q], &e, g),
            None => mat.dissipation.zeta_prime(z[q], &e).ddot(&e),
        };
        row.dissip_visc = row.dissip_visc + w * visc;
        let gm2 = (0..d).fold(T::zero(), |s, a| s + gmu[q][a] * gmu[q][a]);
        row.dissip_diff = row.dissip_diff + w * mat.mobility_hat(f, z[q])? * gm2;
        if let Some(g) = &loads.gravity {
            let gg = g(t, x);
            let s = tr.rho_r[q] / det_floor(f, reg.eps);
            let p = (0..d).fold(T::zero(), |acc, a| acc + gg[a] * v[q][a]);
            row.power_gravity = row.power_gravity + w * s * p;
        }
        if let Some(src) = &loads.momentum_source {
            let m = src(t, x);
            let mut p = (0..d).fold(T::zero(), |acc, a| acc + m.value[a] * v[q][a]);
            p = p + m.flux.ddot(&gv[q]);
            if let Some(g2) = &g2 {
                p = p + m.hyper.dddot(&g2[q]);
            }
            row.power_gravity = row.power_gravity + w * p;
        }
        if let Some(src) = &loads.diffusion_source {
            let s = src(t, x);
            let mu_q = disc
                .ztab
                .vals_at(q)
                .iter()
                .zip(&state.mu)
                .fold(T::zero(), |a, (&p, &c)| a + p * c);
            let p = s.value * mu_q + (0..d).fold(T::zero(), |acc, a| acc + s.flux[a] * gmu[q][a]);
            row.power_influx = row.power_influx + w * p;
        }
        let over = (z[q] - T::one()).max(-z[q]).max(T::zero());
        row.z_overshoot = row.z_overshoot.max(over);
    }
    row.chi_active = T::from_usize_lossy(active) / T::from_usize_lossy(grid.len().max(1));
    if let (Ok(bq), Some(zb), Some(vb)) = (grid.boundary(), &disc.zbtab, &disc.vbtab) {
        let mub = zb.scalar_values(&state.mu);
        for (p, &m) in bq.points().iter().zip(&mub) {
            row.dissip_bdry = row.dissip_bdry + p.weight * loads.transfer * m * m;
        }
        if let Some(h) = &loads.influx {
            for (p, &m) in bq.points().iter().zip(&mub) {
                row.power_influx = row.power_influx + p.weight * h(t, &p.x) * m;
            }
        }
        if let Some(f) = &loads.traction {
            let (ft, _) = tangential_traction(disc, |x| f(t, x))?;
            let vv = vb.vector_values(&state.v);
            for ((p, fv), vq) in bq.points().iter().zip(&ft).zip(&vv) {
                let dotp = (0..d).fold(T::zero(), |a, c| a + fv[c] * vq[c]);
                row.power_traction = row.power_traction + p.weight * dotp;
            }
        }
    }
    Ok(row)
}

/// Ledger rows of a run, one per recorded time level.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LedgerHistory<T> {
    pub rows: Vec<EnergyLedger<T>>,
}

impl<T: Real> LedgerHistory<T> {
    pub fn push(&mut self, row: EnergyLedger<T>) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `R_n = E_n − E_0 + Σ_{m≤n} Δt_m (D_m − P_m)` with rates taken at the
    /// end of each step; `n` counts steps after the initial row.
    pub fn balance_residual(&self, n: usize) -> T {
        let n = n.min(self.rows.len().saturating_sub(1));
        let mut acc = self.rows[n].energy() - self.rows[0].energy();
        for m in 1..=n {
            let dt = self.rows[m].time - self.rows[m - 1].time;
            acc = acc + dt * (self.rows[m].dissipation() - self.rows[m].power());
        }
        acc
    }

    /// `R_n` for every `n`.
    pub fn balance_residuals(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.rows.len());
        if self.rows.is_empty() {
            return out;
        }
        let e0 = self.rows[0].energy();
        let mut acc = T::zero();
        out.push(T::zero());
        for m in 1..self.rows.len() {
            let dt = self.rows[m].time - self.rows[m - 1].time;
            acc = acc + dt * (self.rows[m].dissipation() - self.rows[m].power());
            out.push(self.rows[m].energy() - e0 + acc);
        }
        out
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", LEDGER_COLUMNS.join(","))?;
        for r in &self.rows {
            write_row(&mut out, r)?;
        }
        Ok(())
    }
}

/// One CSV line with 17 significant digits per entry.
pub fn write_row<T: Real, W: Write>(out: &mut W, row: &EnergyLedger<T>) -> io::Result<()> {
    let cells: Vec<String> = row
        .values()
        .iter()
        .map(|v| format!("{:.16e}", v.to_f64_lossy()))
        .collect();
    writeln!(out, "{}", cells.join(","))
}

/// Whether the cut-off and determinant floor can have influenced a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegularizationActivity {
    /// Every node has `det F ≥ ε`.
    pub det_bound: bool,
    /// Every node has `|F| ≤ 1/ε`.
    pub norm_bound: bool,
    pub det_violations: usize,
    pub norm_violations: usize,
}

impl RegularizationActivity {
    pub fn inactive(&self) -> bool {
        self.det_bound && self.norm_bound
    }
}

pub fn regularization_activity<T: Real>(state: &FieldState<T>, eps: T) -> RegularizationActivity {
    let f = &state.transport.f;
    let det_violations = f.iter().filter(|f| !(f.det() >= eps)).count();
    let norm_violations = f.iter().filter(|f| !(f.norm() <= T::one() / eps)).count();
    RegularizationActivity {
        det_bound: det_violations == 0,
        norm_bound: norm_violations == 0,
        det_violations,
        norm_violations,
    }
}

/// `χ_ε` at every node.
pub fn cutoff_field<T: Real>(state: &FieldState<T>, eps: T) -> Vec<T> {
    state
        .transport
        .f
        .iter()
        .map(|f| cutoff_chi(f, eps))
        .collect()
}

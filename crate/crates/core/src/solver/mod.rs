//! Staggered time stepping of the regularized system: transport of `F`, `ρ`
//! by the current velocity, a backward-Euler Galerkin solve for the content
//! `z`, then a backward-Euler Galerkin solve for the velocity.

mod diffusion;
mod disc;
mod momentum;
pub mod newton;

pub use diffusion::{pointwise_mu, solve_diffusion, ContentEval, DiffusionProblem};
pub use disc::Discretization;
pub use momentum::{solve_momentum, tangential_traction, traction_term, MomentumProblem};
pub use newton::{JacobianCache, NewtonOptions, NewtonReport};

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::BoxDomain;
use crate::material::{MaterialModel, Regularization};
use crate::scalar::Real;
use crate::tensor::{Tensor2, Tensor3};
use crate::transport::{self, NodalVelocity, TransportOptions, TransportState};

/// Time- and space-dependent vector data `(t, x) ↦ [T; 3]`.
pub type VectorLoad<T> = Arc<dyn Fn(T, &[T; 3]) -> [T; 3] + Send + Sync>;
/// Time- and space-dependent scalar data.
pub type ScalarLoad<T> = Arc<dyn Fn(T, &[T; 3]) -> T + Send + Sync>;

/// Weak-form momentum source `∫ value·ṽ + flux:∇ṽ + hyper⋮∇²ṽ`; used by
/// manufactured-solution runs.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumDensity<T> {
    pub value: [T; 3],
    pub flux: Tensor2<T>,
    pub hyper: Tensor3<T>,
}

/// Weak-form content source `∫ value·z̃ + flux·∇z̃`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionDensity<T> {
    pub value: T,
    pub flux: [T; 3],
}

pub type MomentumSource<T> = Arc<dyn Fn(T, &[T; 3]) -> MomentumDensity<T> + Send + Sync>;
pub type DiffusionSource<T> = Arc<dyn Fn(T, &[T; 3]) -> DiffusionDensity<T> + Send + Sync>;

/// External data: gravity `g` (m/s²), wall traction `f` (Pa, tangential),
/// influx `h` and transfer coefficient `ϰ ≥ 0` of the Robin condition.
#[derive(Clone, Default)]
pub struct Loads<T> {
    pub gravity: Option<VectorLoad<T>>,
    pub traction: Option<VectorLoad<T>>,
    pub influx: Option<ScalarLoad<T>>,
    pub transfer: T,
    pub momentum_source: Option<MomentumSource<T>>,
    pub diffusion_source: Option<DiffusionSource<T>>,
}

impl<T: fmt::Debug> fmt::Debug for Loads<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Loads")
            .field("gravity", &self.gravity.is_some())
            .field("traction", &self.traction.is_some())
            .field("influx", &self.influx.is_some())
            .field("transfer", &self.transfer)
            .field("momentum_source", &self.momentum_source.is_some())
            .field("diffusion_source", &self.diffusion_source.is_some())
            .finish()
    }
}

/// Initial data; `density` is the current density `ρ₀`, from which
/// `ρ_R = ρ₀ det F₀`.
#[derive(Clone)]
pub struct InitialData<T> {
    pub velocity: Arc<dyn Fn(&[T; 3]) -> [T; 3] + Send + Sync>,
    pub deformation: Arc<dyn Fn(&[T; 3]) -> Tensor2<T> + Send + Sync>,
    pub content: Arc<dyn Fn(&[T; 3]) -> T + Send + Sync>,
    pub density: Arc<dyn Fn(&[T; 3]) -> T + Send + Sync>,
}

impl<T: Real> InitialData<T> {
    /// Rest state: `v = 0`, `F = I`, uniform `z` and `ρ`.
    pub fn rest(dim: usize, z: T, rho: T) -> Self {
        Self {
            velocity: Arc::new(|_| [T::zero(); 3]),
            deformation: Arc::new(move |_| Tensor2::identity(dim)),
            content: Arc::new(move |_| z),
            density: Arc::new(move |_| rho),
        }
    }
}

impl<T> fmt::Debug for InitialData<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("InitialData { .. }")
    }
}

/// Final time, nominal step and the smallest step dt control may use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid<T> {
    pub t_end: T,
    pub dt: T,
    pub min_dt: T,
}

#[derive(Clone, Debug)]
pub struct Scenario<T> {
    pub domain: BoxDomain<T>,
    pub velocity_degree: usize,
    pub content_degree: usize,
    /// Gauss points per axis; `None` picks the default for the degrees.
    pub quad_points: Option<usize>,
    pub material: MaterialModel<T>,
    pub regularization: Regularization<T>,
    pub loads: Loads<T>,
    pub initial: InitialData<T>,
    pub time: TimeGrid<T>,
    pub newton: NewtonOptions<T>,
    /// Advective Courant number of the transport sub-steps.
    pub cfl: T,
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        self.regularization.validate()?;
        if self.material.dim != self.domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.domain.dim(),
                got: self.material.dim,
            });
        }
        if !(self.loads.transfer >= T::zero()) {
            return Err(Error::invalid("loads.transfer", "must be >= 0"));
        }
        let t = &self.time;
        if !(t.dt > T::zero()) {
            return Err(Error::invalid("time.dt", "must be > 0"));
        }
        if !(t.t_end >= T::zero()) {
            return Err(Error::invalid("time.t_end", "must be >= 0"));
        }
        if !(t.min_dt > T::zero() && t.min_dt <= t.dt) {
            return Err(Error::invalid("time.min_dt", "must lie in (0, dt]"));
        }
        if !(self.cfl > T::zero()) {
            return Err(Error::invalid("time.cfl", "must be > 0"));
        }
        Ok(())
    }
}

/// Discrete unknowns at one time level.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState<T> {
    pub t: T,
    pub v: Vec<T>,
    pub z: Vec<T>,
    pub mu: Vec<T>,
    pub transport: TransportState<T>,
}

/// What one accepted step did.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport<T> {
    pub index: usize,
    pub t: T,
    pub dt: T,
    /// Rejected attempts before acceptance.
    pub halvings: usize,
    pub transport_substeps: usize,
    pub diffusion: NewtonReport<T>,
    pub momentum: NewtonReport<T>,
}

fn recoverable(e: &Error) -> bool {
    matches!(
        e,
        Error::NonlinearSolveFailure { .. }
            | Error::LossOfPositivity { .. }
            | Error::SingularMatrix { .. }
            | Error::DegenerateState { .. }
            | Error::NonPositiveStretch { .. }
    )
}

/// Owns a scenario, its discretization and the current state.
#[derive(Debug)]
pub struct Simulator<T> {
    scenario: Scenario<T>,
    disc: Discretization<T>,
    state: FieldState<T>,
    det_floor: T,
    dt: T,
    steps: usize,
    traction_normal: T,
    mom_cache: JacobianCache<T>,
    diff_cache: JacobianCache<T>,
}

impl<T: Real> Simulator<T> {
    pub fn new(scenario: Scenario<T>) -> Result<Self> {
        scenario.validate()?;
        let disc = Discretization::new(
            &scenario.domain,
            scenario.velocity_degree,
            scenario.content_degree,
            scenario.quad_points,
        )?;
        let state = initial_state(&scenario, &disc)?;
        let det_floor = state.transport.min_det_f() * T::lit(1e-6);
        let traction_normal = match (&scenario.loads.traction, disc.grid.boundary()) {
            (Some(f), Ok(_)) => tangential_traction(&disc, |x| f(T::zero(), x))?.1,
            _ => T::zero(),
        };
        let dt = scenario.time.dt;
        Ok(Self {
            scenario,
            disc,
            state,
            det_floor,
            dt,
            steps: 0,
            traction_normal,
            mom_cache: JacobianCache::default(),
            diff_cache: JacobianCache::default(),
        })
    }

    pub fn scenario(&self) -> &Scenario<T> {
        &self.scenario
    }

    pub fn discretization(&self) -> &Discretization<T> {
        &self.disc
    }

    pub fn state(&self) -> &FieldState<T> {
        &self.state
    }

    /// Replaces the current state (used by tests and restarts).
    pub fn set_state(&mut self, state: FieldState<T>) {
        self.state = state;
        self.mom_cache.clear();
        self.diff_cache.clear();
    }

    /// Positivity floor `δ_min` on `det F`.
    pub fn det_floor(&self) -> T {
        self.det_floor
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Largest normal traction component removed at the walls at `t = 0`;
    /// nonzero values mean the input traction was not tangential.
    pub fn traction_normal_violation(&self) -> T {
        self.traction_normal
    }

    /// One staggered step of size `dt` from `state`, without dt control.
    pub fn advance(
        &mut self,
        state: &FieldState<T>,
        dt: T,
    ) -> Result<(FieldState<T>, StepReport<T>)> {
        let sc = &self.scenario;
        let disc = &self.disc;
        let t_new = state.t + dt;
        let vel = NodalVelocity::from_coeffs(&disc.vtab, &state.v);
        let topts = TransportOptions {
            eps_f: sc.regularization.eps_f,
            r: sc.regularization.r,
            cfl: sc.cfl,
            det_floor: self.det_floor,
        };
        let (tr, trep) = transport::advance(&disc.grid, &state.transport, &vel, dt, &topts)?;

        let mut dp = DiffusionProblem::new(disc, sc, &state.z, &tr.f, &vel.v, dt, t_new)?;
        let (z, mu, drep) = solve_diffusion(&mut dp, &sc.newton, &mut self.diff_cache)?;

        let mut mp = MomentumProblem::new(
            disc,
            sc,
            &state.v,
            &state.transport,
            &tr,
            &z,
            &trep.mass_flux,
            dt,
            t_new,
        )?;
        let (v, mrep) = solve_momentum(&mut mp, &state.v, &sc.newton, &mut self.mom_cache)?;

        let next = FieldState {
            t: t_new,
            v,
            z,
            mu,
            transport: tr,
        };
        let report = StepReport {
            index: self.steps + 1,
            t: t_new,
            dt,
            halvings: 0,
            transport_substeps: trep.substeps,
            diffusion: drep,
            momentum: mrep,
        };
        Ok((next, report))
    }

    /// Advances the current state by at most the nominal step, never past
    /// `t_stop`, halving on recoverable failures.
    pub fn step_until(&mut self, t_stop: T) -> Result<StepReport<T>> {
        let nominal = self.scenario.time.dt;
        let min_dt = self.scenario.time.min_dt;
        let remaining = t_stop - self.state.t;
        let mut dt = self.dt.min(remaining);
        // Absorb a sliver left over by rounding into this step.
        if remaining - dt < nominal * T::lit(1e-9) {
            dt = remaining;
        }
        let mut halvings = 0;
        loop {
            let current = self.state.clone();
            match self.advance(&current, dt) {
                Ok((next, mut rep)) => {
                    rep.halvings = halvings;
                    self.state = next;
                    self.steps += 1;
                    let base = if halvings > 0 { dt } else { self.dt };
                    self.dt = (base * T::two()).min(nominal);
                    return Ok(rep);
                }
                Err(e) if recoverable(&e) => {
                    self.mom_cache.clear();
                    self.diff_cache.clear();
                    let half = dt * T::half();
                    if half < min_dt {
                        return Err(Error::StepTooSmall {
                            dt: half.to_f64_lossy(),
                            min_dt: min_dt.to_f64_lossy(),
                            cause: Box::new(e),
                        });
                    }
                    dt = half;
                    halvings += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Nominal-step advance to the scenario's final time.
    pub fn step(&mut self) -> Result<StepReport<T>> {
        self.step_until(self.scenario.time.t_end)
    }

    pub fn finished(&self) -> bool {
        self.finished_at(self.scenario.time.t_end)
    }

    pub fn finished_at(&self, t_stop: T) -> bool {
        self.state.t >= t_stop - self.scenario.time.dt * T::lit(1e-9)
    }
}

/// Discrete initial state: `v₀` and `z₀` projected, `F₀` and `ρ₀` sampled
/// at the nodes, `μ₀` projected from the pointwise potential.
pub fn initial_state<T: Real>(
    scenario: &Scenario<T>,
    disc: &Discretization<T>,
) -> Result<FieldState<T>> {
    let init = &scenario.initial;
    let pts = disc.grid.points();
    let vvals: Vec<[T; 3]> = pts.iter().map(|x| (init.velocity)(x)).collect();
    let v = disc.project_velocity(&vvals)?;
    let zvals: Vec<T> = pts.iter().map(|x| (init.content)(x)).collect();
    if let Some(bad) = zvals
        .iter()
        .find(|z| !(**z >= T::zero() && **z <= T::one()))
    {
        return Err(Error::invalid(
            "initial.content",
            format!("z0 = {bad} lies outside [0, 1]"),
        ));
    }
    let z = disc.project_scalar(&zvals);
    let f: Vec<Tensor2<T>> = pts.iter().map(|x| (init.deformation)(x)).collect();
    let dim = disc.dim();
    if let Some(bad) = f.iter().find(|f| f.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let mut rho_r = Vec::with_capacity(pts.len());
    for (x, fq) in pts.iter().zip(&f) {
        let det = fq.det();
        if !(det > T::zero()) {
            return Err(Error::invalid(
                "initial.deformation",
                format!("det F0 = {det} is not positive"),
            ));
        }
        let rho = (init.density)(x);
        if !(rho > T::zero()) {
            return Err(Error::invalid(
                "initial.density",
                format!("rho0 = {rho} is not positive"),
            ));
        }
        rho_r.push(rho * det);
    }
    let transport = TransportState::new(f, rho_r)?;
    let reg = &scenario.regularization;
    let zq = disc.ztab.scalar_values(&z);
    let mut mu_nodes = Vec::with_capacity(zq.len());
    for (fq, &zz) in transport.f.iter().zip(&zq) {
        let chi = crate::material::cutoff_chi(fq, reg.eps);
        mu_nodes.push(pointwise_mu(&scenario.material, reg, fq, chi, zz)?);
    }
    let mu = disc.project_scalar(&mu_nodes);
    Ok(FieldState {
        t: T::zero(),
        v,
        z,
        mu,
        transport,
    })
}

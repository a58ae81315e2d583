//! Transport of the deformation gradient and the densities by a frozen
//! discrete velocity.
//!
//! Everything lives on the quadrature nodes of a [`QuadGrid`]. Rates are
//!
//! ```text
//! ∂t F    = (∇v) F − (v·∇) F + ε_F div(|∇F|^{r−2} ∇F)
//! ∂t ρ    = −v·∇ρ − ρ div v
//! ∂t ρ_R  = −v·∇ρ_R
//! ∂t F⁻¹  = −F⁻¹ ∇v − (v·∇) F⁻¹
//! ```
//!
//! with collocation derivatives of the nodal data and exact Galerkin values
//! of `v`, `∇v`. The integrator is Heun's method (SSP-RK2), sub-stepped.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::grid::{QuadGrid, ShapeTable};
use crate::scalar::Real;
use crate::tensor::Tensor2;

/// Transported fields at the quadrature nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportState<T> {
    pub f: Vec<Tensor2<T>>,
    pub rho: Vec<T>,
    /// Referential density `ρ₀ det F₀`, materially constant.
    pub rho_r: Vec<T>,
    pub finv: Option<Vec<Tensor2<T>>>,
}

impl<T: Real> TransportState<T> {
    /// State with `ρ = ρ_R / det F`.
    pub fn new(f: Vec<Tensor2<T>>, rho_r: Vec<T>) -> Result<Self> {
        if f.len() != rho_r.len() {
            return Err(Error::DimensionMismatch {
                expected: f.len(),
                got: rho_r.len(),
            });
        }
        let mut s = Self {
            f,
            rho: Vec::new(),
            rho_r,
            finv: None,
        };
        s.rho = s.rho_from_f()?;
        Ok(s)
    }

    pub fn uniform(n: usize, dim: usize, rho_r: T) -> Self {
        Self {
            f: vec![Tensor2::identity(dim); n],
            rho: vec![rho_r; n],
            rho_r: vec![rho_r; n],
            finv: None,
        }
    }

    /// Starts co-evolving `F⁻¹` from the current `F`.
    pub fn with_inverse(mut self) -> Result<Self> {
        self.finv = Some(self.f.iter().map(|f| f.inv()).collect::<Result<_>>()?);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn rho_from_f(&self) -> Result<Vec<T>> {
        self.f
            .iter()
            .zip(&self.rho_r)
            .map(|(f, &r)| {
                let j = f.det();
                if j > T::zero() {
                    Ok(r / j)
                } else {
                    Err(Error::DegenerateState {
                        det_f: j.to_f64_lossy(),
                    })
                }
            })
            .collect()
    }

    pub fn min_det_f(&self) -> T {
        self.f.iter().fold(T::infinity(), |m, f| m.min(f.det()))
    }

    pub fn max_abs_f(&self) -> T {
        self.f.iter().fold(T::zero(), |m, f| m.max(f.norm()))
    }

    /// `max |ρ det F − ρ_R|` over the nodes.
    pub fn mass_residual(&self) -> T {
        self.f
            .iter()
            .zip(self.rho.iter().zip(&self.rho_r))
            .fold(T::zero(), |m, (f, (&r, &rr))| {
                m.max((r * f.det() - rr).abs())
            })
    }

    /// `max |F F⁻¹ − I|` when the inverse is carried.
    pub fn inverse_defect(&self) -> Option<T> {
        let finv = self.finv.as_ref()?;
        Some(self.f.iter().zip(finv).fold(T::zero(), |m, (f, g)| {
            m.max((*f * *g - Tensor2::identity(f.dim())).max_abs())
        }))
    }
}

/// Velocity and velocity gradient sampled at the quadrature nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalVelocity<T> {
    pub v: Vec<[T; 3]>,
    pub grad: Vec<Tensor2<T>>,
}

impl<T: Real> NodalVelocity<T> {
    pub fn zero(n: usize, dim: usize) -> Self {
        Self {
            v: vec![[T::zero(); 3]; n],
            grad: vec![Tensor2::zeros(dim); n],
        }
    }

    /// From velocity coefficients and the velocity table at the nodes.
    pub fn from_coeffs(table: &ShapeTable<T>, coeffs: &[T]) -> Self {
        Self {
            v: table.vector_values(coeffs),
            grad: table.vector_grads(coeffs),
        }
    }

    /// From a closed-form field returning `(v, ∇v)`.
    pub fn from_fn(points: &[[T; 3]], f: impl Fn(&[T; 3]) -> ([T; 3], Tensor2<T>)) -> Self {
        let (v, grad) = points.iter().map(f).unzip();
        Self { v, grad }
    }

    pub fn max_grad(&self) -> T {
        self.grad.iter().fold(T::zero(), |m, g| m.max(g.norm()))
    }
}

/// Parameters of one transport advance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportOptions<T> {
    /// Coefficient of the `r`-Laplacian regularization; 0 switches it off.
    pub eps_f: T,
    pub r: T,
    pub cfl: T,
    /// Positivity floor `δ_min` on det F.
    pub det_floor: T,
}

impl<T: Real> Default for TransportOptions<T> {
    fn default() -> Self {
        Self {
            eps_f: T::zero(),
            r: T::lit(3.0),
            cfl: T::half(),
            det_floor: T::zero(),
        }
    }
}

/// Diagnostics of one advance.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportReport<T> {
    pub substeps: usize,
    /// Time-averaged mass flux `ρ v` seen by the integrator, per node.
    pub mass_flux: Vec<[T; 3]>,
    pub min_det_f: T,
}

struct Rates<T> {
    f: Vec<Tensor2<T>>,
    rho: Vec<T>,
    rho_r: Vec<T>,
    finv: Option<Vec<Tensor2<T>>>,
}

fn convect<T: Real, V>(grid: &QuadGrid<T>, data: &[V], vel: &NodalVelocity<T>, zero: V) -> Vec<V>
where
    V: Copy + Add<Output = V> + Mul<T, Output = V>,
{
    let mut out = vec![zero; data.len()];
    for a in 0..grid.dim() {
        if vel.v.iter().all(|v| v[a] == T::zero()) {
            continue;
        }
        let da = grid.partial(data, a);
        for ((o, d), v) in out.iter_mut().zip(da).zip(&vel.v) {
            *o = *o + d * v[a];
        }
    }
    out
}

/// `div(|∇F|^{r−2}∇F)` in weak collocation form with natural boundary
/// condition `(∇F)n = 0`.
pub fn f_regularization<T: Real>(grid: &QuadGrid<T>, f: &[Tensor2<T>], r: T) -> Vec<Tensor2<T>> {
    let dim = grid.dim();
    let grads: Vec<Vec<Tensor2<T>>> = (0..dim).map(|a| grid.partial(f, a)).collect();
    let expo = r - T::two();
    let coef: Vec<T> = (0..f.len())
        .map(|m| {
            let n2 = grads.iter().fold(T::zero(), |s, g| s + g[m].ddot(&g[m]));
            if n2 == T::zero() {
                T::zero()
            } else {
                n2.sqrt().powf(expo)
            }
        })
        .collect();
    let mut out = vec![Tensor2::zeros(f.first().map_or(dim, |t| t.dim())); f.len()];
    for (a, g) in grads.iter().enumerate() {
        let flux: Vec<Tensor2<T>> = g.iter().zip(&coef).map(|(g, &c)| *g * c).collect();
        for (o, d) in out.iter_mut().zip(grid.partial_adjoint(&flux, a)) {
            *o -= d;
        }
    }
    out
}

fn rates<T: Real>(
    grid: &QuadGrid<T>,
    f: &[Tensor2<T>],
    rho: &[T],
    rho_r: &[T],
    finv: Option<&[Tensor2<T>]>,
    vel: &NodalVelocity<T>,
    opts: &TransportOptions<T>,
) -> Rates<T> {
    let zf = Tensor2::zeros(grid.dim());
    let cf = convect(grid, f, vel, zf);
    let mut rf: Vec<Tensor2<T>> = f
        .iter()
        .zip(&cf)
        .zip(&vel.grad)
        .map(|((f, c), g)| *g * *f - *c)
        .collect();
    if opts.eps_f != T::zero() {
        for (o, d) in rf.iter_mut().zip(f_regularization(grid, f, opts.r)) {
            *o += d * opts.eps_f;
        }
    }
    let crho = convect(grid, rho, vel, T::zero());
    let rrho = rho
        .iter()
        .zip(&crho)
        .zip(&vel.grad)
        .map(|((&r, &c), g)| -c - r * g.trace())
        .collect();
    let rrho_r = convect(grid, rho_r, vel, T::zero())
        .into_iter()
        .map(|c| -c)
        .collect();
    let rfinv = finv.map(|fi| {
        let c = convect(grid, fi, vel, zf);
        fi.iter()
            .zip(&c)
            .zip(&vel.grad)
            .map(|((fi, c), g)| -(*fi * *g) - *c)
            .collect()
    });
    Rates {
        f: rf,
        rho: rrho,
        rho_r: rrho_r,
        finv: rfinv,
    }
}

fn substep_count<T: Real>(
    grid: &QuadGrid<T>,
    vel: &NodalVelocity<T>,
    f: &[Tensor2<T>],
    dt: T,
    opts: &TransportOptions<T>,
) -> usize {
    let dim = grid.dim();
    let dnorm: Vec<T> = (0..dim).map(|a| grid.diff_norm(a)).collect();
    let adv = vel.v.iter().fold(T::zero(), |m, v| {
        m.max((0..dim).fold(T::zero(), |s, a| s + v[a].abs() * dnorm[a]))
    });
    let mut rate = adv.max(vel.max_grad());
    if opts.eps_f > T::zero() {
        let grads: Vec<Vec<Tensor2<T>>> = (0..dim).map(|a| grid.partial(f, a)).collect();
        let gmax = (0..f.len()).fold(T::zero(), |m, n| {
            m.max(
                grads
                    .iter()
                    .fold(T::zero(), |s, g| s + g[n].ddot(&g[n]))
                    .sqrt(),
            )
        });
        let coef = (opts.r - T::one()) * gmax.powf(opts.r - T::two()) + T::lit(1e-3);
        let d2 = dnorm.iter().fold(T::zero(), |s, &d| s + d * d);
        rate = rate.max(T::lit(4.0) * opts.eps_f * coef * d2);
    }
    if rate == T::zero() {
        return 1;
    }
    let n = (dt * rate / opts.cfl).ceil().to_f64_lossy();
    (n.max(1.0) as usize).min(1_000_000)
}

/// Advances every transported field of `state` over `dt`.
pub fn advance<T: Real>(
    grid: &QuadGrid<T>,
    state: &TransportState<T>,
    vel: &NodalVelocity<T>,
    dt: T,
    opts: &TransportOptions<T>,
) -> Result<(TransportState<T>, TransportReport<T>)> {
    let n_sub = substep_count(grid, vel, &state.f, dt, opts);
    let h = dt / T::from_usize_lossy(n_sub);
    let half = T::half();
    let mut s = state.clone();
    let mut rho_avg = vec![T::zero(); s.len()];
    let mut min_det = s.min_det_f();
    let check = |st: &TransportState<T>| -> Result<T> {
        let m = st.min_det_f();
        let min_rho = st.rho.iter().fold(T::infinity(), |a, &r| {
            if a.is_nan() || !r.is_finite() {
                T::nan()
            } else {
                a.min(r)
            }
        });
        if !(m > opts.det_floor) || !m.is_finite() || !(min_rho > T::zero()) {
            return Err(Error::LossOfPositivity {
                min_det_f: m.to_f64_lossy(),
                min_rho: min_rho.to_f64_lossy(),
                floor: opts.det_floor.to_f64_lossy(),
            });
        }
        Ok(m)
    };
    for _ in 0..n_sub {
        let k0 = rates(grid, &s.f, &s.rho, &s.rho_r, s.finv.as_deref(), vel, opts);
        let stage = TransportState {
            f: axpy(&s.f, &k0.f, h),
            rho: axpy(&s.rho, &k0.rho, h),
            rho_r: axpy(&s.rho_r, &k0.rho_r, h),
            finv: s
                .finv
                .as_ref()
                .zip(k0.finv.as_ref())
                .map(|(a, b)| axpy(a, b, h)),
        };
        check(&stage)?;
        let k1 = rates(
            grid,
            &stage.f,
            &stage.rho,
            &stage.rho_r,
            stage.finv.as_deref(),
            vel,
            opts,
        );
        for (acc, (&a, &b)) in rho_avg.iter_mut().zip(s.rho.iter().zip(&stage.rho)) {
            *acc = *acc + (a + b) * half * h;
        }
        s = TransportState {
            f: heun(&s.f, &stage.f, &k1.f, h),
            rho: heun(&s.rho, &stage.rho, &k1.rho, h),
            rho_r: heun(&s.rho_r, &stage.rho_r, &k1.rho_r, h),
            finv: match (&s.finv, &stage.finv, &k1.finv) {
                (Some(a), Some(b), Some(c)) => Some(heun(a, b, c, h)),
                _ => None,
            },
        };
        min_det = check(&s)?;
    }
    let mass_flux = rho_avg
        .iter()
        .zip(&vel.v)
        .map(|(&r, v)| v.map(|c| c * r / dt))
        .collect();
    Ok((
        s,
        TransportReport {
            substeps: n_sub,
            mass_flux,
            min_det_f: min_det,
        },
    ))
}

fn axpy<T: Real, V>(y: &[V], k: &[V], h: T) -> Vec<V>
where
    V: Copy + Add<Output = V> + Mul<T, Output = V>,
{
    y.iter().zip(k).map(|(&y, &k)| y + k * h).collect()
}

/// Heun update `½ y + ½ (y₁ + h k₁)`.
fn heun<T: Real, V>(y: &[V], y1: &[V], k1: &[V], h: T) -> Vec<V>
where
    V: Copy + Add<Output = V> + Mul<T, Output = V>,
{
    let half = T::half();
    y.iter()
        .zip(y1.iter().zip(k1))
        .map(|(&y, (&y1, &k1))| y * half + (y1 + k1 * h) * half)
        .collect()
}

/// Advances `F` only (no regularization); densities are left untouched.
pub fn advance_f<T: Real>(
    grid: &QuadGrid<T>,
    state: &TransportState<T>,
    vel: &NodalVelocity<T>,
    dt: T,
    det_floor: T,
) -> Result<TransportState<T>> {
    let opts = TransportOptions {
        det_floor,
        ..TransportOptions::default()
    };
    let (next, _) = advance(grid, state, vel, dt, &opts)?;
    Ok(TransportState {
        f: next.f,
        finv: next.finv,
        ..state.clone()
    })
}

/// [`advance_f`] with the `r`-Laplacian regularization of strength `eps_f`.
pub fn advance_f_regularized<T: Real>(
    grid: &QuadGrid<T>,
    state: &TransportState<T>,
    vel: &NodalVelocity<T>,
    dt: T,
    eps_f: T,
    r: T,
    det_floor: T,
) -> Result<TransportState<T>> {
    if eps_f != T::zero() && !(r > T::two()) {
        return Err(Error::invalid("regularization.r", "must exceed 2"));
    }
    let opts = TransportOptions {
        eps_f,
        r,
        det_floor,
        ..TransportOptions::default()
    };
    let (next, _) = advance(grid, state, vel, dt, &opts)?;
    Ok(TransportState {
        f: next.f,
        finv: next.finv,
        ..state.clone()
    })
}

/// Advances `ρ` only.
pub fn advance_rho<T: Real>(
    grid: &QuadGrid<T>,
    state: &TransportState<T>,
    vel: &NodalVelocity<T>,
    dt: T,
) -> Result<TransportState<T>> {
    let opts = TransportOptions {
        det_floor: T::neg_infinity(),
        ..TransportOptions::default()
    };
    let (next, _) = advance(grid, state, vel, dt, &opts)?;
    Ok(TransportState {
        rho: next.rho,
        ..state.clone()
    })
}

use super::disc::Discretization;
use super::newton::{self, JacobianCache, NewtonOptions, NewtonReport, System};
use super::{Loads, Scenario};
use crate::error::Result;
use crate::linalg::{norm_inf, Matrix};
use crate::material::{det_floor, Dissipation};
use crate::scalar::Real;
use crate::tensor::{Tensor2, Tensor3};
use crate::transport::TransportState;

/// Tangential part of `f` at every boundary point and the largest normal
/// component that was removed.
pub fn tangential_traction<T: Real>(
    disc: &Discretization<T>,
    f: impl Fn(&[T; 3]) -> [T; 3],
) -> Result<(Vec<[T; 3]>, T)> {
    let bq = disc.grid.boundary()?;
    let mut worst = T::zero();
    let vals = bq
        .points()
        .iter()
        .map(|p| {
            let mut fv = f(&p.x);
            let fn_ = (0..3).fold(T::zero(), |s, a| s + fv[a] * p.normal[a]);
            worst = worst.max(fn_.abs());
            for a in 0..3 {
                fv[a] = fv[a] - fn_ * p.normal[a];
            }
            fv
        })
        .collect();
    Ok((vals, worst))
}

/// `∫_Γ f·v dS` with the tangential part of `f`.
pub fn traction_term<T: Real>(
    disc: &Discretization<T>,
    f: impl Fn(&[T; 3]) -> [T; 3],
    v: &[T],
) -> Result<T> {
    let (ft, _) = tangential_traction(disc, f)?;
    let bq = disc.grid.boundary()?;
    let tab = disc.vbtab.as_ref().expect("boundary table");
    let vals = tab.vector_values(v);
    Ok(bq
        .points()
        .iter()
        .zip(ft.iter().zip(&vals))
        .fold(T::zero(), |s, (p, (f, v))| {
            s + p.weight * (0..3).fold(T::zero(), |a, c| a + f[c] * v[c])
        }))
}

/// Backward-Euler momentum balance for the new velocity coefficients with
/// transported quantities and content frozen at the new level.
///
/// Inertia is written as `ρ̄(v − v_old)/dt + ½(ρ_new − ρ_old)v/dt +
/// ½(∇v)J − ½ div(J ⊗ v)` in weak form, where `J` is the mass flux of the
/// transport step and `ρ̄` the average density.
pub struct MomentumProblem<'a, T> {
    disc: &'a Discretization<T>,
    diss: Dissipation<T>,
    dt: T,
    w: Vec<T>,
    rho_bar: Vec<T>,
    flux: Vec<[T; 3]>,
    z: Vec<T>,
    rhs0: Vec<T>,
    scale: T,
    jet: usize,
}

struct Jets<T> {
    val: Vec<[T; 3]>,
    grad: Vec<Tensor2<T>>,
    hess: Option<Vec<Tensor3<T>>>,
}

impl<'a, T: Real> MomentumProblem<'a, T> {
    /// `prev` supplies `ρ_old`, `v_old`; `next` the transported `F`, `ρ`,
    /// `ρ_R`; `z_new` the content coefficients; `flux` the mass flux.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        disc: &'a Discretization<T>,
        scenario: &Scenario<T>,
        prev_v: &[T],
        prev: &TransportState<T>,
        next: &TransportState<T>,
        z_new: &[T],
        flux: &[[T; 3]],
        dt: T,
        t_new: T,
    ) -> Result<Self> {
        let d = disc.dim();
        let mat = &scenario.material;
        let eps = scenario.regularization.eps;
        let loads: &Loads<T> = &scenario.loads;
        let grid = &disc.grid;
        let n = grid.len();
        let z = disc.ztab.scalar_values(z_new);
        let v_old = disc.vtab.vector_values(prev_v);
        let w = grid.weights().to_vec();
        let mut c_val = Vec::with_capacity(n);
        let mut c_grad = Vec::with_capacity(n);
        let mut c_hess = Vec::with_capacity(n);
        let mut rho_bar = Vec::with_capacity(n);
        let mut scale = T::zero();
        for q in 0..n {
            let x = &grid.points()[q];
            let f = &next.f[q];
            let rb = (prev.rho[q] + next.rho[q]) * T::half();
            rho_bar.push(rb);
            let reg = mat.regularized(f, z[q], eps)?;
            let mut body = [T::zero(); 3];
            if let Some(g) = &loads.gravity {
                let gv = g(t_new, x);
                let s = next.rho_r[q] / det_floor(f, eps);
                for a in 0..d {
                    body[a] = body[a] + s * gv[a];
                }
            }
            let mut s1 = Tensor2::zeros(d);
            let mut s2 = Tensor3::zeros(d);
            if let Some(src) = &loads.momentum_source {
                let m = src(t_new, x);
                for a in 0..d {
                    body[a] = body[a] + m.value[a];
                }
                s1 = m.flux;
                s2 = m.hyper;
            }
            let mut cv = [T::zero(); 3];
            for a in 0..d {
                cv[a] = -w[q] * (prev.rho[q] * v_old[q][a] / dt + body[a]);
            }
            let local = (0..d).fold(T::zero(), |s, a| {
                s + (prev.rho[q] * v_old[q][a] / dt).abs() + body[a].abs()
            });
            scale = scale.max(w[q] * (local + reg.stress.max_abs() + s1.max_abs()));
            c_val.push(cv);
            c_grad.push((reg.stress - s1) * w[q]);
            c_hess.push(s2.scale(-w[q]));
        }
        let jet = 1 + d + d * d;
        let mut prob = Self {
            disc,
            diss: mat.dissipation,
            dt,
            w,
            rho_bar,
            flux: flux.to_vec(),
            z,
            rhs0: Vec::new(),
            scale,
            jet,
        };
        let hess = if loads.momentum_source.is_some() {
            Some(c_hess)
        } else {
            None
        };
        let mut rhs0 = prob.assemble(&Jets {
            val: c_val,
            grad: c_grad,
            hess,
        });
        if let Some(f) = &loads.traction {
            let (ft, _) = tangential_traction(disc, |x| f(t_new, x))?;
            let bq = disc.grid.boundary()?;
            let tab = disc.vbtab.as_ref().expect("boundary table");
            for (s, (p, fv)) in bq.points().iter().zip(&ft).enumerate() {
                for (i, r) in rhs0.iter_mut().enumerate() {
                    *r = *r - p.weight * fv[tab.comp(i)] * tab.val(s, i);
                }
            }
        }
        prob.scale = prob.scale.max(norm_inf(&rhs0));
        prob.rhs0 = rhs0;
        Ok(prob)
    }

    /// Characteristic size of the residual entries.
    pub fn scale(&self) -> T {
        self.scale
    }

    fn uses_hessian(&self) -> bool {
        self.diss.nu != T::zero()
    }

    fn assemble(&self, jets: &Jets<T>) -> Vec<T> {
        let tab = &self.disc.vtab;
        let d = self.disc.dim();
        let nf = tab.n_fn();
        let mut out = vec![T::zero(); nf];
        for q in 0..tab.n_pts() {
            let (val, grad) = (&jets.val[q], &jets.grad[q]);
            let hess = jets.hess.as_ref().map(|h| &h[q]);
            for (i, r) in out.iter_mut().enumerate() {
                let c = tab.comp(i);
                let g = tab.grad(q, i);
                let mut acc = val[c] * tab.val(q, i);
                for b in 0..d {
                    acc = acc + grad[(c, b)] * g[b];
                }
                if let Some(h) = hess {
                    let hi = tab.hess(q, i);
                    for b in 0..d {
                        for k in 0..d {
                            acc = acc + h[(c, b, k)] * hi[b][k];
                        }
                    }
                }
                *r = *r + acc;
            }
        }
        out
    }

    pub fn residual(&self, v: &[T]) -> Vec<T> {
        let tab = &self.disc.vtab;
        let d = self.disc.dim();
        let vals = tab.vector_values(v);
        let grads = tab.vector_grads(v);
        let n = vals.len();
        let mut jv = Vec::with_capacity(n);
        let mut jg = Vec::with_capacity(n);
        for q in 0..n {
            let w = self.w[q];
            let jf = &self.flux[q];
            let gj = grads[q].apply(jf);
            let mut rv = [T::zero(); 3];
            for c in 0..d {
                rv[c] = w * (self.rho_bar[q] * vals[q][c] / self.dt + T::half() * gj[c]);
            }
            let e = grads[q].sym();
            let mut rg = self.diss.zeta_prime(self.z[q], &e);
            for c in 0..d {
                for b in 0..d {
                    rg[(c, b)] = rg[(c, b)] - T::half() * jf[b] * vals[q][c];
                }
            }
            jv.push(rv);
            jg.push(rg * w);
        }
        let hess = if self.uses_hessian() {
            let g2 = tab.vector_grad2(v);
            Some(
                g2.iter()
                    .zip(&self.w)
                    .map(|(g, &w)| self.diss.hyperstress(&g.sym12()).scale(w))
                    .collect(),
            )
        } else {
            None
        };
        let mut r = self.assemble(&Jets {
            val: jv,
            grad: jg,
            hess,
        });
        for (a, b) in r.iter_mut().zip(&self.rhs0) {
            *a = *a + *b;
        }
        r
    }

    pub fn jacobian(&self, v: &[T]) -> Matrix<T> {
        let tab = &self.disc.vtab;
        let d = self.disc.dim();
        let nf = tab.n_fn();
        let jet = self.jet;
        let grads = tab.vector_grads(v);
        let g2 = if self.uses_hessian() {
            Some(tab.vector_grad2(v))
        } else {
            None
        };
        let mut jac = Matrix::zeros(nf, nf);
        // a[c][j·jet + m]: coefficient of test jet entry m for component c.
        let mut a = vec![vec![T::zero(); nf * jet]; d];
        let mut test = vec![T::zero(); nf * jet];
        for q in 0..tab.n_pts() {
            let w = self.w[q];
            let jf = &self.flux[q];
            let z = self.z[q];
            let e = grads[q].sym();
            let gq = g2.as_ref().map(|g| g[q].sym12());
            for i in 0..nf {
                let t = &mut test[i * jet..(i + 1) * jet];
                t[0] = tab.val(q, i);
                let g = tab.grad(q, i);
                let h = tab.hess(q, i);
                for b in 0..d {
                    t[1 + b] = g[b];
                    for k in 0..d {
                        t[1 + d + b * d + k] = h[b][k];
                    }
                }
            }
            for j in 0..nf {
                let cj = tab.comp(j);
                let psi = tab.val(q, j);
                let gp = tab.grad(q, j);
                for row in a.iter_mut() {
                    row[j * jet..(j + 1) * jet]
                        .iter_mut()
                        .for_each(|x| *x = T::zero());
                }
                let jdot = (0..d).fold(T::zero(), |s, b| s + jf[b] * gp[b]);
                a[cj][j * jet] = w * (self.rho_bar[q] * psi / self.dt + T::half() * jdot);
                let de = Tensor2::from_fn(d, |r, s| {
                    let mut x = T::zero();
                    if r == cj {
                        x = x + gp[s];
                    }
                    if s == cj {
                        x = x + gp[r];
                    }
                    x * T::half()
                });
                let dz = self.diss.zeta_second(z, &e, &de);
                for c in 0..d {
                    for b in 0..d {
                        a[c][j * jet + 1 + b] = w * dz[(c, b)];
                    }
                }
                for b in 0..d {
                    a[cj][j * jet + 1 + b] = a[cj][j * jet + 1 + b] - w * T::half() * jf[b] * psi;
                }
                if let Some(g) = &gq {
                    let hp = tab.hess(q, j);
                    let dg = Tensor3::from_fn(d, |r, s, k| {
                        let mut x = T::zero();
                        if r == cj {
                            x = x + hp[k][s];
                        }
                        if s == cj {
                            x = x + hp[k][r];
                        }
                        x * T::half()
                    });
                    let dh = self.diss.hyperstress_tangent(g, &dg);
                    for c in 0..d {
                        for b in 0..d {
                            for k in 0..d {
                                a[c][j * jet + 1 + d + b * d + k] = w * dh[(c, b, k)];
                            }
                        }
                    }
                }
            }
            let m_used = if gq.is_some() { jet } else { 1 + d };
            for i in 0..nf {
                let ci = tab.comp(i);
                let t = &test[i * jet..i * jet + m_used];
                let ac = &a[ci];
                let row = jac.row_mut(i);
                for (j, r) in row.iter_mut().enumerate() {
                    let aj = &ac[j * jet..j * jet + m_used];
                    let mut acc = T::zero();
                    for m in 0..m_used {
                        acc = acc + aj[m] * t[m];
                    }
                    *r = *r + acc;
                }
            }
        }
        jac
    }
}

impl<T: Real> System<T> for MomentumProblem<'_, T> {
    fn residual(&mut self, x: &[T]) -> Result<Vec<T>> {
        Ok(MomentumProblem::residual(self, x))
    }

    fn jacobian(&mut self, x: &[T]) -> Result<Matrix<T>> {
        Ok(MomentumProblem::jacobian(self, x))
    }
}

/// Newton solve of a [`MomentumProblem`] starting from `v0`.
pub fn solve_momentum<T: Real>(
    problem: &mut MomentumProblem<'_, T>,
    v0: &[T],
    opts: &NewtonOptions<T>,
    cache: &mut JacobianCache<T>,
) -> Result<(Vec<T>, NewtonReport<T>)> {
    let scale = problem.scale();
    let tag = problem.dt;
    newton::solve(problem, v0.to_vec(), scale, opts, cache, tag, "momentum")
}

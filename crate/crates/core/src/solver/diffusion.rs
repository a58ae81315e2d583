use super::disc::Discretization;
use super::newton::{self, JacobianCache, NewtonOptions, NewtonReport, System};
use super::Scenario;
use crate::error::Result;
use crate::linalg::{norm_inf, Matrix};
use crate::material::{cutoff_chi, yosida, MaterialModel, Regularization};
use crate::scalar::Real;
use crate::tensor::Tensor2;

/// `μ(F,z) = χ_ε(F) ∂_z φ̂(F,z) + 𝒩_k(z)` with `χ_ε(F)` supplied.
pub fn pointwise_mu<T: Real>(
    mat: &MaterialModel<T>,
    reg: &Regularization<T>,
    f: &Tensor2<T>,
    chi: T,
    z: T,
) -> Result<T> {
    let dz = if chi == T::zero() {
        T::zero()
    } else {
        chi * mat.dphi_hat(f, z)?.1
    };
    Ok(dz + yosida(z, reg.yosida_k))
}

/// Backward-Euler content balance for the new content coefficients with
/// `F` at the new level and the old velocity in the advection term.
///
/// The potential entering the flux and the boundary term is the discrete
/// L² projection `μ_h` of the pointwise `μ(F,z)` onto the content space.
pub struct DiffusionProblem<'a, T> {
    disc: &'a Discretization<T>,
    mat: MaterialModel<T>,
    reg: Regularization<T>,
    dt: T,
    transfer: T,
    z_old: Vec<T>,
    f: Vec<Tensor2<T>>,
    chi: Vec<T>,
    v: Vec<[T; 3]>,
    src0: Vec<T>,
    src1: Vec<[T; 3]>,
    bchi: Vec<T>,
    bh: Vec<T>,
    bw: Vec<T>,
    scale: T,
}

/// Fields derived from a candidate content.
pub struct ContentEval<T> {
    pub z: Vec<T>,
    pub grad_z: Vec<[T; 3]>,
    pub mu_nodes: Vec<T>,
    pub mu: Vec<T>,
    pub grad_mu: Vec<[T; 3]>,
    pub mobility: Vec<T>,
}

impl<'a, T: Real> DiffusionProblem<'a, T> {
    /// `f_new` is the transported deformation gradient at the nodes, `v_old`
    /// the nodal velocity used for advection.
    pub fn new(
        disc: &'a Discretization<T>,
        scenario: &Scenario<T>,
        z_old: &[T],
        f_new: &[Tensor2<T>],
        v_old: &[[T; 3]],
        dt: T,
        t_new: T,
    ) -> Result<Self> {
        let grid = &disc.grid;
        let reg = scenario.regularization;
        let loads = &scenario.loads;
        let chi: Vec<T> = f_new.iter().map(|f| cutoff_chi(f, reg.eps)).collect();
        let n = grid.len();
        let (mut src0, mut src1) = (vec![T::zero(); n], vec![[T::zero(); 3]; n]);
        if let Some(s) = &loads.diffusion_source {
            for (q, x) in grid.points().iter().enumerate() {
                let d = s(t_new, x);
                src0[q] = d.value;
                src1[q] = d.flux;
            }
        }
        let (mut bchi, mut bh, mut bw) = (Vec::new(), Vec::new(), Vec::new());
        if let Ok(bq) = grid.boundary() {
            let bf = grid.to_boundary(f_new)?;
            bchi = bf.iter().map(|f| cutoff_chi(f, reg.eps)).collect();
            bw = bq.points().iter().map(|p| p.weight).collect();
            bh = match &loads.influx {
                Some(h) => bq.points().iter().map(|p| h(t_new, &p.x)).collect(),
                None => vec![T::zero(); bq.len()],
            };
        }
        let zq = disc.ztab.scalar_values(z_old);
        let mut scale = T::zero();
        for q in 0..n {
            let s1 = src1[q].iter().fold(T::zero(), |m, x| m.max(x.abs()));
            scale = scale.max(grid.weights()[q] * (zq[q].abs() / dt + src0[q].abs() + s1));
        }
        for (w, h) in bw.iter().zip(&bh) {
            scale = scale.max(*w * h.abs());
        }
        Ok(Self {
            disc,
            mat: scenario.material,
            reg,
            dt,
            transfer: loads.transfer,
            z_old: z_old.to_vec(),
            f: f_new.to_vec(),
            chi,
            v: v_old.to_vec(),
            src0,
            src1,
            bchi,
            bh,
            bw,
            scale,
        })
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn mu_nodes(&self, zq: &[T]) -> Result<Vec<T>> {
        zq.iter()
            .enumerate()
            .map(|(q, &z)| pointwise_mu(&self.mat, &self.reg, &self.f[q], self.chi[q], z))
            .collect()
    }

    pub fn evaluate(&self, z: &[T]) -> Result<ContentEval<T>> {
        let tab = &self.disc.ztab;
        let zq = tab.scalar_values(z);
        let grad_z = tab.scalar_grads(z);
        let mu_nodes = self.mu_nodes(&zq)?;
        let mu = self.disc.project_scalar(&mu_nodes);
        let grad_mu = tab.scalar_grads(&mu);
        let mobility = zq
            .iter()
            .zip(&self.f)
            .map(|(&z, f)| self.mat.mobility_hat(f, z))
            .collect::<Result<_>>()?;
        Ok(ContentEval {
            z: zq,
            grad_z,
            mu_nodes,
            mu,
            grad_mu,
            mobility,
        })
    }

    pub fn residual(&self, z: &[T]) -> Result<Vec<T>> {
        let d = self.disc.dim();
        let tab = &self.disc.ztab;
        let ev = self.evaluate(z)?;
        let zold = tab.scalar_values(&self.z_old);
        let nf = tab.n_fn();
        let mut r = vec![T::zero(); nf];
        for (q, &w) in self.disc.grid.weights().iter().enumerate() {
            let adv = (0..d).fold(T::zero(), |s, a| s + self.v[q][a] * ev.grad_z[q][a]);
            let val = w * ((ev.z[q] - zold[q]) / self.dt + adv - self.src0[q]);
            let one_chi = T::one() - self.chi[q];
            let mut flux = [T::zero(); 3];
            for a in 0..d {
                flux[a] = w
                    * (ev.mobility[q] * ev.grad_mu[q][a] + one_chi * ev.grad_z[q][a]
                        - self.src1[q][a]);
            }
            for (i, ri) in r.iter_mut().enumerate() {
                let g = tab.grad(q, i);
                let mut acc = val * tab.val(q, i);
                for a in 0..d {
                    acc = acc + flux[a] * g[a];
                }
                *ri = *ri + acc;
            }
        }
        if let Some(bt) = &self.disc.zbtab {
            let zb = bt.scalar_values(z);
            let mub = bt.scalar_values(&ev.mu);
            for s in 0..bt.n_pts() {
                let b = self.bw[s]
                    * (self.transfer * mub[s] + (T::one() - self.bchi[s]) * zb[s] - self.bh[s]);
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri = *ri + b * bt.val(s, i);
                }
            }
        }
        Ok(r)
    }

    fn fd_step(z: T) -> T {
        T::lit(1e-6) * (T::one() + z.abs())
    }

    pub fn jacobian(&self, z: &[T]) -> Result<Matrix<T>> {
        let d = self.disc.dim();
        let tab = &self.disc.ztab;
        let nf = tab.n_fn();
        let ev = self.evaluate(z)?;
        let weights = self.disc.grid.weights();
        let mut dmu = Vec::with_capacity(ev.z.len());
        let mut dmob = Vec::with_capacity(ev.z.len());
        for (q, &zq) in ev.z.iter().enumerate() {
            let h = Self::fd_step(zq);
            let f = &self.f[q];
            let mp = pointwise_mu(&self.mat, &self.reg, f, self.chi[q], zq + h)?;
            let mm = pointwise_mu(&self.mat, &self.reg, f, self.chi[q], zq - h)?;
            dmu.push((mp - mm) / (h + h));
            let bp = self.mat.mobility_hat(f, zq + h)?;
            let bm = self.mat.mobility_hat(f, zq - h)?;
            dmob.push((bp - bm) / (h + h));
        }
        // C = Bᵀ W diag(μ′) B, Q = M⁻¹ C maps δz to δμ_h.
        let mut c = Matrix::zeros(nf, nf);
        let mut local = Matrix::zeros(nf, nf);
        let mut stiff = Matrix::zeros(nf, nf);
        for (q, &w) in weights.iter().enumerate() {
            let vals = tab.vals_at(q);
            let wm = w * dmu[q];
            let one_chi = T::one() - self.chi[q];
            for i in 0..nf {
                let pi = vals[i];
                let gi = *tab.grad(q, i);
                let crow = c.row_mut(i);
                let a = wm * pi;
                for j in 0..nf {
                    crow[j] = crow[j] + a * vals[j];
                }
                let mob_dot = (0..d).fold(T::zero(), |s, a| s + ev.grad_mu[q][a] * gi[a]);
                let lrow = local.row_mut(i);
                for j in 0..nf {
                    let gj = tab.grad(q, j);
                    let mut adv = T::zero();
                    let mut gg = T::zero();
                    for a in 0..d {
                        adv = adv + self.v[q][a] * gj[a];
                        gg = gg + gi[a] * gj[a];
                    }
                    lrow[j] = lrow[j]
                        + w * (vals[j] * pi / self.dt
                            + adv * pi
                            + one_chi * gg
                            + dmob[q] * vals[j] * mob_dot);
                }
                let srow = stiff.row_mut(i);
                let wmob = w * ev.mobility[q];
                for j in 0..nf {
                    let gj = tab.grad(q, j);
                    let gg = (0..d).fold(T::zero(), |s, a| s + gi[a] * gj[a]);
                    srow[j] = srow[j] + wmob * gg;
                }
            }
        }
        if let Some(bt) = &self.disc.zbtab {
            for s in 0..bt.n_pts() {
                let vals = bt.vals_at(s);
                let wt = self.bw[s] * self.transfer;
                let wc = self.bw[s] * (T::one() - self.bchi[s]);
                for i in 0..nf {
                    let srow = stiff.row_mut(i);
                    for j in 0..nf {
                        srow[j] = srow[j] + wt * vals[i] * vals[j];
                    }
                    let lrow = local.row_mut(i);
                    for j in 0..nf {
                        lrow[j] = lrow[j] + wc * vals[i] * vals[j];
                    }
                }
            }
        }
        let lu = self.disc.zmass();
        let ct = c.transpose();
        let mut qm = Matrix::zeros(nf, nf);
        for j in 0..nf {
            let col = lu.solve(ct.row(j));
            for (i, x) in col.into_iter().enumerate() {
                qm[(i, j)] = x;
            }
        }
        let sq = stiff.matmul(&qm);
        for i in 0..nf {
            let lrow = local.row_mut(i);
            for (l, s) in lrow.iter_mut().zip(sq.row(i)) {
                *l = *l + *s;
            }
        }
        Ok(local)
    }
}

impl<T: Real> System<T> for DiffusionProblem<'_, T> {
    fn residual(&mut self, x: &[T]) -> Result<Vec<T>> {
        DiffusionProblem::residual(self, x)
    }

    fn jacobian(&mut self, x: &[T]) -> Result<Matrix<T>> {
        DiffusionProblem::jacobian(self, x)
    }
}

/// Newton solve of a [`DiffusionProblem`] from the old content; returns
/// the new content and potential coefficients.
pub fn solve_diffusion<T: Real>(
    problem: &mut DiffusionProblem<'_, T>,
    opts: &NewtonOptions<T>,
    cache: &mut JacobianCache<T>,
) -> Result<(Vec<T>, Vec<T>, NewtonReport<T>)> {
    let scale = problem.scale().max(norm_inf(&problem.z_old) * T::epsilon());
    let tag = problem.dt;
    let z0 = problem.z_old.clone();
    let (z, rep) = newton::solve(problem, z0, scale, opts, cache, tag, "diffusion")?;
    let mu = problem.evaluate(&z)?.mu;
    Ok((z, mu, rep))
}

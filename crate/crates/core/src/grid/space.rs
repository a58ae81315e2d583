use std::collections::HashMap;

use super::legendre::{legendre_jet, Factor};
use super::BoxDomain;
use crate::error::{Error, Result};
use crate::linalg::{Lu, Matrix};
use crate::scalar::Real;
use crate::tensor::{Tensor2, Tensor3};

/// One tensor-product basis function: `e_comp · Π_a factor_a(ξ_a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisFn {
    pub comp: usize,
    pub factors: [Factor; 3],
}

/// Ordered list of basis functions with the number of field components.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    dim: usize,
    degree: usize,
    n_comp: usize,
    funcs: Vec<BasisFn>,
}

impl Basis {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn n_comp(&self) -> usize {
        self.n_comp
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.funcs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.funcs.is_empty()
    }

    #[inline]
    pub fn funcs(&self) -> &[BasisFn] {
        &self.funcs
    }

    fn check_len<T>(&self, coeffs: &[T]) -> Result<()> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: coeffs.len(),
            });
        }
        Ok(())
    }

    /// Values, gradients and Hessians of every basis function at `points`.
    pub fn tabulate<T: Real>(&self, domain: &BoxDomain<T>, points: &[[T; 3]]) -> ShapeTable<T> {
        let d = self.dim;
        let n_fn = self.len();
        let mut table = ShapeTable {
            dim: d,
            n_pts: points.len(),
            n_fn,
            comp: self.funcs.iter().map(|f| f.comp).collect(),
            val: Vec::with_capacity(points.len() * n_fn),
            grad: Vec::with_capacity(points.len() * n_fn),
            hess: Vec::with_capacity(points.len() * n_fn),
        };
        let max_j = self.degree + 1;
        let scale: Vec<T> = (0..d).map(|a| domain.ref_scale(a)).collect();
        for x in points {
            let xi: Vec<T> = (0..d).map(|a| domain.to_ref(a, x[a])).collect();
            let jets: Vec<_> = xi.iter().map(|&t| legendre_jet(max_j, t)).collect();
            let mut cache: HashMap<(usize, Factor), [T; 3]> = HashMap::new();
            for f in &self.funcs {
                let mut fv = [[T::zero(); 3]; 3];
                for a in 0..d {
                    let r = *cache
                        .entry((a, f.factors[a]))
                        .or_insert_with(|| f.factors[a].eval(xi[a], &jets[a]));
                    fv[a] = [r[0], r[1] * scale[a], r[2] * scale[a] * scale[a]];
                }
                let prod_except = |skip: &[usize]| {
                    (0..d)
                        .filter(|a| !skip.contains(a))
                        .fold(T::one(), |p, a| p * fv[a][0])
                };
                table.val.push(prod_except(&[]));
                let mut g = [T::zero(); 3];
                let mut h = [[T::zero(); 3]; 3];
                for a in 0..d {
                    g[a] = fv[a][1] * prod_except(&[a]);
                    h[a][a] = fv[a][2] * prod_except(&[a]);
                    for b in a + 1..d {
                        let v = fv[a][1] * fv[b][1] * prod_except(&[a, b]);
                        h[a][b] = v;
                        h[b][a] = v;
                    }
                }
                table.grad.push(g);
                table.hess.push(h);
            }
        }
        table
    }
}

/// Basis values at a fixed point set, stored point-major.
#[derive(Clone, Debug)]
pub struct ShapeTable<T> {
    dim: usize,
    n_pts: usize,
    n_fn: usize,
    comp: Vec<usize>,
    val: Vec<T>,
    grad: Vec<[T; 3]>,
    hess: Vec<[[T; 3]; 3]>,
}

impl<T: Real> ShapeTable<T> {
    #[inline]
    pub fn n_pts(&self) -> usize {
        self.n_pts
    }

    #[inline]
    pub fn n_fn(&self) -> usize {
        self.n_fn
    }

    #[inline]
    pub fn comp(&self, i: usize) -> usize {
        self.comp[i]
    }

    #[inline]
    pub fn val(&self, q: usize, i: usize) -> T {
        self.val[q * self.n_fn + i]
    }

    #[inline]
    pub fn grad(&self, q: usize, i: usize) -> &[T; 3] {
        &self.grad[q * self.n_fn + i]
    }

    #[inline]
    pub fn hess(&self, q: usize, i: usize) -> &[[T; 3]; 3] {
        &self.hess[q * self.n_fn + i]
    }

    #[inline]
    pub fn vals_at(&self, q: usize) -> &[T] {
        &self.val[q * self.n_fn..(q + 1) * self.n_fn]
    }

    pub fn scalar_values(&self, c: &[T]) -> Vec<T> {
        (0..self.n_pts)
            .map(|q| crate::linalg::dot(self.vals_at(q), c))
            .collect()
    }

    pub fn scalar_grads(&self, c: &[T]) -> Vec<[T; 3]> {
        (0..self.n_pts)
            .map(|q| {
                let mut g = [T::zero(); 3];
                for (i, &ci) in c.iter().enumerate() {
                    let gi = self.grad(q, i);
                    for a in 0..self.dim {
                        g[a] = g[a] + ci * gi[a];
                    }
                }
                g
            })
            .collect()
    }

    pub fn scalar_hessians(&self, c: &[T]) -> Vec<Tensor2<T>> {
        (0..self.n_pts)
            .map(|q| {
                let mut h = Tensor2::zeros(self.dim);
                for (i, &ci) in c.iter().enumerate() {
                    let hi = self.hess(q, i);
                    for a in 0..self.dim {
                        for b in 0..self.dim {
                            h[(a, b)] = h[(a, b)] + ci * hi[a][b];
                        }
                    }
                }
                h
            })
            .collect()
    }

    pub fn vector_values(&self, c: &[T]) -> Vec<[T; 3]> {
        (0..self.n_pts)
            .map(|q| {
                let mut v = [T::zero(); 3];
                for (i, &ci) in c.iter().enumerate() {
                    let k = self.comp[i];
                    v[k] = v[k] + ci * self.val(q, i);
                }
                v
            })
            .collect()
    }

    /// `(∇v)_{ij} = ∂_j v_i`.
    pub fn vector_grads(&self, c: &[T]) -> Vec<Tensor2<T>> {
        (0..self.n_pts)
            .map(|q| {
                let mut g = Tensor2::zeros(self.dim);
                for (i, &ci) in c.iter().enumerate() {
                    let k = self.comp[i];
                    let gi = self.grad(q, i);
                    for a in 0..self.dim {
                        g[(k, a)] = g[(k, a)] + ci * gi[a];
                    }
                }
                g
            })
            .collect()
    }

    /// `(∇²v)_{ijk} = ∂_k ∂_j v_i`.
    pub fn vector_grad2(&self, c: &[T]) -> Vec<Tensor3<T>> {
        (0..self.n_pts)
            .map(|q| {
                let mut g = Tensor3::zeros(self.dim);
                for (i, &ci) in c.iter().enumerate() {
                    let k = self.comp[i];
                    let hi = self.hess(q, i);
                    for a in 0..self.dim {
                        for b in 0..self.dim {
                            g[(k, a, b)] = g[(k, a, b)] + ci * hi[a][b];
                        }
                    }
                }
                g
            })
            .collect()
    }
}

fn multi_indices(dim: usize, ranges: &[usize; 3]) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    let r = |a: usize| if a < dim { ranges[a] } else { 1 };
    for i in 0..r(0) {
        for j in 0..r(1) {
            for k in 0..r(2) {
                out.push([i, j, k]);
            }
        }
    }
    out
}

/// Content space `Z_l`: all tensor-product Legendre polynomials of degree
/// at most `l` per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpace<T> {
    domain: BoxDomain<T>,
    basis: Basis,
}

impl<T: Real> ScalarSpace<T> {
    pub fn new(domain: &BoxDomain<T>, degree: usize) -> Self {
        let dim = domain.dim();
        let funcs = multi_indices(dim, &[degree + 1; 3])
            .into_iter()
            .map(|m| BasisFn {
                comp: 0,
                factors: [0, 1, 2].map(|a| Factor::Legendre(if a < dim { m[a] } else { 0 })),
            })
            .collect();
        Self {
            domain: domain.clone(),
            basis: Basis {
                dim,
                degree,
                n_comp: 1,
                funcs,
            },
        }
    }

    #[inline]
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    #[inline]
    pub fn domain(&self) -> &BoxDomain<T> {
        &self.domain
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn tabulate(&self, points: &[[T; 3]]) -> ShapeTable<T> {
        self.basis.tabulate(&self.domain, points)
    }

    /// Coefficients of the constant function `c`.
    pub fn constant(&self, c: T) -> Vec<T> {
        let mut out = vec![T::zero(); self.len()];
        out[0] = c;
        out
    }

    pub fn eval_field(&self, coeffs: &[T], points: &[[T; 3]]) -> Result<Vec<T>> {
        self.basis.check_len(coeffs)?;
        Ok(self.tabulate(points).scalar_values(coeffs))
    }

    pub fn grad_field(&self, coeffs: &[T], points: &[[T; 3]]) -> Result<Vec<[T; 3]>> {
        self.basis.check_len(coeffs)?;
        Ok(self.tabulate(points).scalar_grads(coeffs))
    }

    pub fn grad2_field(&self, coeffs: &[T], points: &[[T; 3]]) -> Result<Vec<Tensor2<T>>> {
        self.basis.check_len(coeffs)?;
        Ok(self.tabulate(points).scalar_hessians(coeffs))
    }

    /// Exact coefficient embedding into a space of higher degree.
    pub fn embed(&self, coeffs: &[T], finer: &Self) -> Result<Vec<T>> {
        embed_into(&self.basis, coeffs, &finer.basis)
    }
}

/// Velocity space `V_k`: component `i` uses `(1 − ξ_i²) P_j(ξ_i)` along
/// its own non-periodic axis and `P_j` along the others, so `v·n = 0` on
/// every wall for every element.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocitySpace<T> {
    domain: BoxDomain<T>,
    basis: Basis,
}

impl<T: Real> VelocitySpace<T> {
    pub fn new(domain: &BoxDomain<T>, degree: usize) -> Result<Self> {
        if degree < 2 {
            return Err(Error::invalid(
                "spaces.velocity_degree",
                "must be at least 2",
            ));
        }
        Ok(Self::build(domain, degree, true))
    }

    /// Same degree, no wall constraint; the source layout for
    /// [`VelocitySpace::project_impenetrable`].
    pub fn unconstrained(domain: &BoxDomain<T>, degree: usize) -> Self {
        Self::build(domain, degree, false)
    }

    fn build(domain: &BoxDomain<T>, degree: usize, constrained: bool) -> Self {
        let dim = domain.dim();
        let mut funcs = Vec::new();
        for comp in 0..dim {
            let walled = constrained && !domain.is_periodic(comp);
            let mut ranges = [degree + 1; 3];
            if walled {
                ranges[comp] = degree - 1;
            }
            for m in multi_indices(dim, &ranges) {
                let factors = [0, 1, 2].map(|a| {
                    if a >= dim {
                        Factor::Legendre(0)
                    } else if a == comp && walled {
                        Factor::Bubble(m[a])
                    } else {
                        Factor::Legendre(m[a])
                    }
                });
                funcs.push(BasisFn { comp, factors });
            }
        }
        Self {
            domain: domain.clone(),
            basis: Basis {
                dim,
                degree,
                n_comp: dim,
                funcs,
            },
        }
    }

    #[inline]
    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    #[inline]
    pub fn domain(&self) -> &BoxDomain<T> {
        &self.domain
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.basis.degree
    }

    pub fn tabulate(&self, points: &[[T; 3]]) -> ShapeTable<T> {
        self.basis.tabulate(&self.domain, points)
    }

    pub fn eval_field(&self, coeffs: &[T], points: &[[T; 3]]) -> Result<Vec<[T; 3]>> {
        self.basis.check_len(coeffs)?;
        Ok(self.tabulate(points).vector_values(coeffs))
    }

    pub fn grad_field(&self, coeffs: &[T], points: &[[T; 3]]) -> Result<Vec<Tensor2<T>>> {
        self.basis.check_len(coeffs)?;
        Ok(self.tabulate(points).vector_grads(coeffs))
    }

    pub fn grad2_field(&self, coeffs: &[T], points: &[[T; 3]]) -> Result<Vec<Tensor3<T>>> {
        self.basis.check_len(coeffs)?;
        Ok(self.tabulate(points).vector_grad2(coeffs))
    }

    pub fn embed(&self, coeffs: &[T], finer: &Self) -> Result<Vec<T>> {
        embed_into(&self.basis, coeffs, &finer.basis)
    }

    /// L² projection of `f` (sampled at `points` with `weights`) onto the
    /// space.
    pub fn l2_project(
        &self,
        points: &[[T; 3]],
        weights: &[T],
        f: impl Fn(&[T; 3]) -> [T; 3],
    ) -> Result<Vec<T>> {
        let values: Vec<[T; 3]> = points.iter().map(f).collect();
        self.l2_project_values(points, weights, &values)
    }

    /// L² projection of point samples `values` taken at `points`.
    pub fn l2_project_values(
        &self,
        points: &[[T; 3]],
        weights: &[T],
        values: &[[T; 3]],
    ) -> Result<Vec<T>> {
        let table = self.tabulate(points);
        let n = self.len();
        let mut m = Matrix::zeros(n, n);
        let mut rhs = vec![T::zero(); n];
        for (q, fx) in values.iter().enumerate() {
            let w = weights[q];
            let vals = table.vals_at(q);
            for i in 0..n {
                let ci = table.comp(i);
                let wi = w * vals[i];
                rhs[i] = rhs[i] + wi * fx[ci];
                let row = m.row_mut(i);
                for j in 0..n {
                    if table.comp(j) == ci {
                        row[j] = row[j] + wi * vals[j];
                    }
                }
            }
        }
        Ok(Lu::factor(&m)?.solve(&rhs))
    }

    /// Projects a field given in the [`VelocitySpace::unconstrained`]
    /// layout onto the impenetrable space (L² at the given quadrature).
    pub fn project_impenetrable(
        &self,
        raw: &[T],
        points: &[[T; 3]],
        weights: &[T],
    ) -> Result<Vec<T>> {
        let free = Self::unconstrained(&self.domain, self.degree());
        free.basis.check_len(raw)?;
        let values = free.tabulate(points).vector_values(raw);
        self.l2_project_values(points, weights, &values)
    }
}

fn embed_into<T: Real>(coarse: &Basis, coeffs: &[T], fine: &Basis) -> Result<Vec<T>> {
    coarse.check_len(coeffs)?;
    let pos: HashMap<BasisFn, usize> = fine
        .funcs
        .iter()
        .enumerate()
        .map(|(i, f)| (*f, i))
        .collect();
    let mut out = vec![T::zero(); fine.len()];
    for (f, &c) in coarse.funcs.iter().zip(coeffs) {
        match pos.get(f) {
            Some(&i) => out[i] = c,
            None => {
                return Err(Error::invalid(
                    "spaces.degree",
                    "target space does not contain the source space",
                ))
            }
        }
    }
    Ok(out)
}

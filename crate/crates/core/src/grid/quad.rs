use std::ops::{Add, Mul};

use super::legendre::{
    barycentric_weights, differentiation_matrix, gauss_legendre, lagrange_values,
};
use super::BoxDomain;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tensor Gauss–Legendre grid. Nodes are ordered with axis 0 slowest.
///
/// The transported fields `F`, `ρ`, `ρ_R` live on these nodes; their
/// spatial derivatives come from the Lagrange interpolant through the
/// nodes of each grid line.
#[derive(Clone, Debug)]
pub struct QuadGrid<T> {
    domain: BoxDomain<T>,
    n: usize,
    xi: Vec<T>,
    w1: Vec<T>,
    bary: Vec<T>,
    diff: Vec<Vec<T>>,
    points: Vec<[T; 3]>,
    weights: Vec<T>,
    boundary: Option<BoundaryQuadrature<T>>,
}

/// Boundary node on a wall; `line` is the first grid node of the line
/// normal to the wall through this point.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryPoint<T> {
    pub x: [T; 3],
    pub weight: T,
    pub normal: [T; 3],
    pub axis: usize,
    pub upper: bool,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct BoundaryQuadrature<T> {
    points: Vec<BoundaryPoint<T>>,
    lower_interp: Vec<T>,
    upper_interp: Vec<T>,
}

impl<T: Real> BoundaryQuadrature<T> {
    #[inline]
    pub fn points(&self) -> &[BoundaryPoint<T>] {
        &self.points
    }

    pub fn positions(&self) -> Vec<[T; 3]> {
        self.points.iter().map(|p| p.x).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, values: &[T]) -> T {
        self.points
            .iter()
            .zip(values)
            .fold(T::zero(), |s, (p, &v)| s + p.weight * v)
    }

    pub fn integrate_fn(&self, f: impl Fn(&[T; 3]) -> T) -> T {
        self.points
            .iter()
            .fold(T::zero(), |s, p| s + p.weight * f(&p.x))
    }
}

impl<T: Real> QuadGrid<T> {
    /// `n` Gauss points per axis, exact for degree `2n − 1` per axis.
    pub fn new(domain: &BoxDomain<T>, n: usize) -> Self {
        let dim = domain.dim();
        let (xi, w1) = gauss_legendre::<T>(n);
        let bary = barycentric_weights(&xi);
        let diff = differentiation_matrix(&xi, &bary);
        let jac = (0..dim).fold(T::one(), |j, a| j * domain.length(a) * T::half());
        let total = n.pow(dim as u32);
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        for idx in 0..total {
            let m = multi(idx, n, dim);
            let mut x = [T::zero(); 3];
            let mut w = jac;
            for a in 0..dim {
                x[a] = domain.from_ref(a, xi[m[a]]);
                w = w * w1[m[a]];
            }
            points.push(x);
            weights.push(w);
        }
        let mut grid = Self {
            domain: domain.clone(),
            n,
            xi,
            w1,
            bary,
            diff,
            points,
            weights,
            boundary: None,
        };
        if domain.has_boundary() {
            grid.boundary = Some(grid.build_boundary());
        }
        grid
    }

    /// Default grid for velocity degree `k` and content degree `l`:
    /// `m + 2 + ⌈m/2⌉` points per axis with `m = max(k, l)`. This exceeds
    /// the `2m + 2` exactness needed by the Galerkin products and gives the
    /// collocated transport a 3/2-rule margin against aliasing.
    pub fn for_degrees(domain: &BoxDomain<T>, k: usize, l: usize) -> Self {
        let m = k.max(l);
        Self::new(domain, m + 2 + m.div_ceil(2))
    }

    #[inline]
    pub fn domain(&self) -> &BoxDomain<T> {
        &self.domain
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    #[inline]
    pub fn per_axis(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn points(&self) -> &[[T; 3]] {
        &self.points
    }

    #[inline]
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Reference nodes and weights on `[-1, 1]`.
    pub fn reference_rule(&self) -> (&[T], &[T]) {
        (&self.xi, &self.w1)
    }

    /// Node-index stride along `axis`.
    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim() - 1 - axis) as u32)
    }

    pub fn multi_index(&self, node: usize) -> [usize; 3] {
        multi(node, self.n, self.dim())
    }

    /// Smallest node spacing along `axis` (m).
    pub fn min_spacing(&self, axis: usize) -> T {
        let h = self.domain.length(axis) * T::half();
        self.xi
            .windows(2)
            .map(|w| (w[1] - w[0]) * h)
            .fold(T::infinity(), T::min)
    }

    /// `‖D‖_∞` of the physical differentiation matrix along `axis`.
    pub fn diff_norm(&self, axis: usize) -> T {
        let s = self.domain.ref_scale(axis);
        self.diff
            .iter()
            .map(|row| row.iter().fold(T::zero(), |a, &v| a + v.abs()))
            .fold(T::zero(), T::max)
            * s
    }

    /// Physical 1-D differentiation matrix entry `ℓ_j′(x_i)` along `axis`.
    #[inline]
    pub fn diff_entry(&self, axis: usize, i: usize, j: usize) -> T {
        self.diff[i][j] * self.domain.ref_scale(axis)
    }

    pub fn integrate(&self, values: &[T]) -> T {
        self.weights
            .iter()
            .zip(values)
            .fold(T::zero(), |s, (&w, &v)| s + w * v)
    }

    pub fn integrate_fn(&self, f: impl Fn(&[T; 3]) -> T) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |s, (x, &w)| s + w * f(x))
    }

    /// Collocation derivative `∂_axis` of nodal data.
    pub fn partial<V>(&self, data: &[V], axis: usize) -> Vec<V>
    where
        V: Copy + Add<Output = V> + Mul<T, Output = V>,
    {
        let n = self.n;
        let stride = self.stride(axis);
        let s = self.domain.ref_scale(axis);
        (0..data.len())
            .map(|node| {
                let i = (node / stride) % n;
                let base = node - i * stride;
                let mut acc = data[base] * (self.diff[i][0] * s);
                for j in 1..n {
                    acc = acc + data[base + j * stride] * (self.diff[i][j] * s);
                }
                acc
            })
            .collect()
    }

    /// Transposed collocation derivative: `(Dᵀ)` applied along `axis` with
    /// quadrature weights, i.e. `out_m = Σ_n w_n q_n D_nm / w_m`. This is
    /// the discrete `−∂_axis` that pairs with [`QuadGrid::partial`] under a
    /// natural (no-flux) boundary condition.
    pub fn partial_adjoint<V>(&self, data: &[V], axis: usize) -> Vec<V>
    where
        V: Copy + Add<Output = V> + Mul<T, Output = V>,
    {
        let n = self.n;
        let stride = self.stride(axis);
        let s = self.domain.ref_scale(axis);
        (0..data.len())
            .map(|node| {
                let m = (node / stride) % n;
                let base = node - m * stride;
                let mut acc = data[base] * (self.w1[0] * self.diff[0][m] * s / self.w1[m]);
                for j in 1..n {
                    acc = acc
                        + data[base + j * stride] * (self.w1[j] * self.diff[j][m] * s / self.w1[m]);
                }
                acc
            })
            .collect()
    }

    pub fn boundary(&self) -> Result<&BoundaryQuadrature<T>> {
        self.boundary.as_ref().ok_or(Error::AllPeriodic)
    }

    /// Nodal data interpolated to every boundary point.
    pub fn to_boundary<V>(&self, data: &[V]) -> Result<Vec<V>>
    where
        V: Copy + Add<Output = V> + Mul<T, Output = V>,
    {
        let bq = self.boundary()?;
        Ok(bq
            .points
            .iter()
            .map(|p| {
                let l = if p.upper {
                    &bq.upper_interp
                } else {
                    &bq.lower_interp
                };
                let stride = self.stride(p.axis);
                let mut acc = data[p.line] * l[0];
                for (j, &lj) in l.iter().enumerate().skip(1) {
                    acc = acc + data[p.line + j * stride] * lj;
                }
                acc
            })
            .collect())
    }

    /// Interpolates nodal data to an arbitrary point of the box.
    pub fn interpolate<V>(&self, data: &[V], x: &[T; 3]) -> V
    where
        V: Copy + Add<Output = V> + Mul<T, Output = V>,
    {
        let dim = self.dim();
        let ls: Vec<Vec<T>> = (0..dim)
            .map(|a| lagrange_values(&self.xi, &self.bary, self.domain.to_ref(a, x[a])))
            .collect();
        let mut acc: Option<V> = None;
        for (node, &v) in data.iter().enumerate() {
            let m = self.multi_index(node);
            let c = (0..dim).fold(T::one(), |p, a| p * ls[a][m[a]]);
            acc = Some(match acc {
                None => v * c,
                Some(s) => s + v * c,
            });
        }
        acc.expect("empty grid")
    }

    fn build_boundary(&self) -> BoundaryQuadrature<T> {
        let dim = self.dim();
        let n = self.n;
        let mut points = Vec::new();
        for axis in 0..dim {
            if self.domain.is_periodic(axis) {
                continue;
            }
            let others: Vec<usize> = (0..dim).filter(|&b| b != axis).collect();
            let jac = others
                .iter()
                .fold(T::one(), |j, &b| j * self.domain.length(b) * T::half());
            let count = n.pow(others.len() as u32);
            for upper in [false, true] {
                for idx in 0..count {
                    let mut x = [T::zero(); 3];
                    let mut w = jac;
                    let mut line = 0;
                    let mut rem = idx;
                    for &b in others.iter().rev() {
                        let i = rem % n;
                        rem /= n;
                        x[b] = self.domain.from_ref(b, self.xi[i]);
                        w = w * self.w1[i];
                        line += i * self.stride(b);
                    }
                    x[axis] = if upper {
                        self.domain.upper(axis)
                    } else {
                        self.domain.lower(axis)
                    };
                    let mut normal = [T::zero(); 3];
                    normal[axis] = if upper { T::one() } else { -T::one() };
                    points.push(BoundaryPoint {
                        x,
                        weight: w,
                        normal,
                        axis,
                        upper,
                        line,
                    });
                }
            }
        }
        BoundaryQuadrature {
            points,
            lower_interp: lagrange_values(&self.xi, &self.bary, -T::one()),
            upper_interp: lagrange_values(&self.xi, &self.bary, T::one()),
        }
    }
}

fn multi(mut idx: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut m = [0; 3];
    for a in (0..dim).rev() {
        m[a] = idx % n;
        idx /= n;
    }
    m
}

/// Boundary quadrature of `domain` with `n` Gauss points per face axis.
pub fn boundary_quadrature<T: Real>(
    domain: &BoxDomain<T>,
    n: usize,
) -> Result<BoundaryQuadrature<T>> {
    if !domain.has_boundary() {
        return Err(Error::AllPeriodic);
    }
    Ok(QuadGrid::new(domain, n).build_boundary())
}

//! Small dense tensors for pointwise constitutive math.
//!
//! Storage is fixed at 3×3 (resp. 3×3×3) and the active dimension `d ∈ {1,2,3}`
//! travels with the value; entries outside the active block stay zero.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Second-order tensor, e.g. a deformation or velocity gradient.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor2<T> {
    dim: usize,
    a: [[T; 3]; 3],
}

/// Third-order tensor; used for ∇e(v) (symmetric in its first two slots)
/// and the hyperstress.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor3<T> {
    dim: usize,
    a: [[[T; 3]; 3]; 3],
}

#[inline]
fn check_dim(dim: usize) {
    assert!((1..=3).contains(&dim), "tensor dimension must be 1, 2 or 3");
}

impl<T: Real> Tensor2<T> {
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim);
        Self {
            dim,
            a: [[T::zero(); 3]; 3],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, T::one())
    }

    /// `s·I`.
    pub fn scalar(dim: usize, s: T) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            t.a[i][i] = s;
        }
        t
    }

    pub fn diag(entries: &[T]) -> Self {
        let mut t = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            t.a[i][i] = e;
        }
        t
    }

    /// Builds a tensor from row slices; the row count sets the dimension.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let dim = rows.len();
        let mut t = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "ragged tensor rows");
            for (j, &x) in row.iter().enumerate() {
                t.a[i][j] = x;
            }
        }
        t
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                t.a[i][j] = f(i, j);
            }
        }
        t
    }

    /// `a ⊗ b`.
    pub fn outer(a: &[T], b: &[T]) -> Self {
        let dim = a.len();
        Self::from_fn(dim, |i, j| a[i] * b[j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.a[j][i])
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.a[i][i]).sum()
    }

    /// Double contraction `A:B = Σ AᵢⱼBᵢⱼ`.
    pub fn ddot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                s = s + self.a[i][j] * other.a[i][j];
            }
        }
        s
    }

    /// Frobenius norm `|A|`.
    pub fn norm(&self) -> T {
        self.ddot(self).sqrt()
    }

    pub fn max_abs(&self) -> T {
        let mut m = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.a[i][j].is_finite()))
    }

    pub fn det(&self) -> T {
        let a = &self.a;
        match self.dim {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Cofactor matrix, `A·cof(A)ᵀ = det(A)·I`. The 1×1 cofactor is 1.
    pub fn cof(&self) -> Self {
        let a = &self.a;
        match self.dim {
            1 => Self::identity(1),
            2 => Self::from_rows(&[&[a[1][1], -a[1][0]], &[-a[0][1], a[0][0]]]),
            _ => Self::from_fn(3, |i, j| {
                let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]
            }),
        }
    }

    /// Degeneracy threshold `1e-14·|A|^d`.
    pub fn singular_tolerance(&self) -> T {
        T::lit(1e-14) * self.norm().powi(self.dim as i32)
    }

    pub fn inv(&self) -> Result<Self> {
        let det = self.det();
        let tol = self.singular_tolerance();
        if !(det.abs() > tol) {
            return Err(Error::SingularMatrix {
                det: det.to_f64_lossy(),
                tol: tol.to_f64_lossy(),
            });
        }
        Ok(self.cof().transpose() * (T::one() / det))
    }

    /// Symmetric part `½(G + Gᵀ)`.
    pub fn sym(&self) -> Self {
        (*self + self.transpose()) * T::half()
    }

    pub fn skew(&self) -> Self {
        (*self - self.transpose()) * T::half()
    }

    /// Matrix–vector product over the active block.
    pub fn apply(&self, x: &[T]) -> [T; 3] {
        let mut y = [T::zero(); 3];
        for i in 0..self.dim {
            for j in 0..self.dim {
                y[i] = y[i] + self.a[i][j] * x[j];
            }
        }
        y
    }
}

/// Rate of `det F` along a flow with velocity gradient `∇v`, i.e.
/// `det F · div v`.
pub fn jacobi_rate<T: Real>(f: &Tensor2<T>, gradv: &Tensor2<T>) -> T {
    f.det() * gradv.trace()
}

/// Rate of `F⁻¹` induced by `Ḟ = (∇v)F`: `−F⁻¹·∇v`.
pub fn inverse_flow_rate<T: Real>(finv: &Tensor2<T>, gradv: &Tensor2<T>) -> Tensor2<T> {
    -(*finv * *gradv)
}

impl<T> Index<(usize, usize)> for Tensor2<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.a[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Tensor2<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.a[i][j]
    }
}

impl<T: Real> Add for Tensor2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| self.a[i][j] + rhs.a[i][j])
    }
}

impl<T: Real> Sub for Tensor2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        Self::from_fn(self.dim, |i, j| self.a[i][j] - rhs.a[i][j])
    }
}

impl<T: Real> AddAssign for Tensor2<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> SubAssign for Tensor2<T> {
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<T: Real> Neg for Tensor2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(self.dim, |i, j| -self.a[i][j])
    }
}

impl<T: Real> Mul<T> for Tensor2<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::from_fn(self.dim, |i, j| self.a[i][j] * s)
    }
}

impl<T: Real> Mul for Tensor2<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        Self::from_fn(d, |i, j| {
            (0..d).fold(T::zero(), |s, k| s + self.a[i][k] * rhs.a[k][j])
        })
    }
}

impl<T: Real> Tensor3<T> {
    pub fn zeros(dim: usize) -> Self {
        check_dim(dim);
        Self {
            dim,
            a: [[[T::zero(); 3]; 3]; 3],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    t.a[i][j][k] = f(i, j, k);
                }
            }
        }
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Triple contraction `A⋮B`.
    pub fn dddot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut s = T::zero();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    s = s + self.a[i][j][k] * other.a[i][j][k];
                }
            }
        }
        s
    }

    pub fn norm(&self) -> T {
        self.dddot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.dim, |i, j, k| self.a[i][j][k] * s)
    }

    pub fn is_finite(&self) -> bool {
        self.norm().is_finite()
    }

    /// Symmetrizes the first two slots, turning `∂ₖ∂ⱼvᵢ` into `∂ₖeᵢⱼ(v)`.
    pub fn sym12(&self) -> Self {
        Self::from_fn(self.dim, |i, j, k| {
            T::half() * (self.a[i][j][k] + self.a[j][i][k])
        })
    }
}

impl<T> Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        &self.a[i][j][k]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Tensor3<T> {
    #[inline]
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut T {
        &mut self.a[i][j][k]
    }
}

impl<T: Real> Add for Tensor3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(self.dim, |i, j, k| self.a[i][j][k] + rhs.a[i][j][k])
    }
}

impl<T: Real> Mul<T> for Tensor3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: Real> Sub for Tensor3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(self.dim, |i, j, k| self.a[i][j][k] - rhs.a[i][j][k])
    }
}

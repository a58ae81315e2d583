//! Spatial discretization on an axis-aligned box: modal tensor-product
//! spaces for velocity and content, Gauss quadrature, collocation storage
//! for the transported fields, and boundary quadrature.

pub mod legendre;
mod quad;
mod space;

pub use quad::{boundary_quadrature, BoundaryPoint, BoundaryQuadrature, QuadGrid};
pub use space::{Basis, BasisFn, ScalarSpace, ShapeTable, VelocitySpace};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Axis-aligned box `Π [lower_a, upper_a]`.
///
/// A periodic axis carries no boundary faces and no impenetrability
/// constraint; it exists for verification runs only.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxDomain<T> {
    dim: usize,
    lower: [T; 3],
    upper: [T; 3],
    periodic: [bool; 3],
}

impl<T: Real> BoxDomain<T> {
    pub fn new(lower: &[T], upper: &[T], periodic: &[bool]) -> Result<Self> {
        let dim = lower.len();
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid(
                "domain.lower",
                format!("dimension {dim} not in 1..=3"),
            ));
        }
        if upper.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: upper.len(),
            });
        }
        if periodic.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: periodic.len(),
            });
        }
        let mut b = Self {
            dim,
            lower: [T::zero(); 3],
            upper: [T::one(); 3],
            periodic: [false; 3],
        };
        for a in 0..dim {
            if !(upper[a] > lower[a]) || !upper[a].is_finite() || !lower[a].is_finite() {
                return Err(Error::invalid(
                    "domain.upper",
                    format!("edge {a} has non-positive length"),
                ));
            }
            b.lower[a] = lower[a];
            b.upper[a] = upper[a];
            b.periodic[a] = periodic[a];
        }
        Ok(b)
    }

    /// `[0, 1]^dim` with impenetrable walls.
    pub fn unit(dim: usize) -> Self {
        Self::new(
            &vec![T::zero(); dim],
            &vec![T::one(); dim],
            &vec![false; dim],
        )
        .expect("unit box")
    }

    pub fn with_periodic(mut self, axis: usize, periodic: bool) -> Self {
        self.periodic[axis] = periodic;
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn lower(&self, axis: usize) -> T {
        self.lower[axis]
    }

    #[inline]
    pub fn upper(&self, axis: usize) -> T {
        self.upper[axis]
    }

    #[inline]
    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn has_boundary(&self) -> bool {
        (0..self.dim).any(|a| !self.periodic[a])
    }

    #[inline]
    pub fn length(&self, axis: usize) -> T {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> T {
        (0..self.dim).fold(T::one(), |v, a| v * self.length(a))
    }

    /// `dξ/dx` along `axis`.
    #[inline]
    pub fn ref_scale(&self, axis: usize) -> T {
        T::two() / self.length(axis)
    }

    #[inline]
    pub fn to_ref(&self, axis: usize, x: T) -> T {
        (x - self.lower[axis]) * self.ref_scale(axis) - T::one()
    }

    #[inline]
    pub fn from_ref(&self, axis: usize, xi: T) -> T {
        self.lower[axis] + (xi + T::one()) * self.length(axis) * T::half()
    }

    pub fn contains(&self, x: &[T; 3]) -> bool {
        (0..self.dim).all(|a| x[a] >= self.lower[a] && x[a] <= self.upper[a])
    }
}

use crate::error::Result;
use crate::grid::{BoxDomain, QuadGrid, ScalarSpace, ShapeTable, VelocitySpace};
use crate::linalg::{Lu, Matrix};
use crate::scalar::Real;

/// Spaces, quadrature and every basis table the sub-solvers need.
#[derive(Clone, Debug)]
pub struct Discretization<T> {
    pub grid: QuadGrid<T>,
    pub vspace: VelocitySpace<T>,
    pub zspace: ScalarSpace<T>,
    /// Velocity basis at the quadrature nodes.
    pub vtab: ShapeTable<T>,
    /// Content basis at the quadrature nodes.
    pub ztab: ShapeTable<T>,
    /// Velocity and content bases at the boundary points (empty tables
    /// when the domain has no walls).
    pub vbtab: Option<ShapeTable<T>>,
    pub zbtab: Option<ShapeTable<T>>,
    zmass: Lu<T>,
}

impl<T: Real> Discretization<T> {
    /// Velocity degree `k`, content degree `l`, and `quad_points` Gauss
    /// points per axis (`None` for the default of [`QuadGrid::for_degrees`]).
    pub fn new(
        domain: &BoxDomain<T>,
        k: usize,
        l: usize,
        quad_points: Option<usize>,
    ) -> Result<Self> {
        let vspace = VelocitySpace::new(domain, k)?;
        let zspace = ScalarSpace::new(domain, l);
        let grid = match quad_points {
            Some(n) => QuadGrid::new(domain, n),
            None => QuadGrid::for_degrees(domain, k, l),
        };
        let vtab = vspace.tabulate(grid.points());
        let ztab = zspace.tabulate(grid.points());
        let (vbtab, zbtab) = match grid.boundary() {
            Ok(bq) => {
                let pts = bq.positions();
                (Some(vspace.tabulate(&pts)), Some(zspace.tabulate(&pts)))
            }
            Err(_) => (None, None),
        };
        let n = zspace.len();
        let mut m = Matrix::zeros(n, n);
        for (q, &w) in grid.weights().iter().enumerate() {
            let vals = ztab.vals_at(q);
            for i in 0..n {
                let wi = w * vals[i];
                let row = m.row_mut(i);
                for j in 0..n {
                    row[j] = row[j] + wi * vals[j];
                }
            }
        }
        let zmass = Lu::factor(&m)?;
        Ok(Self {
            grid,
            vspace,
            zspace,
            vtab,
            ztab,
            vbtab,
            zbtab,
            zmass,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.grid.len()
    }

    /// Discrete L² projection of nodal values onto the content space.
    pub fn project_scalar(&self, values: &[T]) -> Vec<T> {
        let rhs = self.weighted_moments(values);
        self.zmass.solve(&rhs)
    }

    /// `Σ_q w_q ψ_i(x_q) values_q`.
    pub(crate) fn weighted_moments(&self, values: &[T]) -> Vec<T> {
        let n = self.zspace.len();
        let mut rhs = vec![T::zero(); n];
        for (q, (&w, &val)) in self.grid.weights().iter().zip(values).enumerate() {
            let wv = w * val;
            for (r, &p) in rhs.iter_mut().zip(self.ztab.vals_at(q)) {
                *r = *r + wv * p;
            }
        }
        rhs
    }

    pub(crate) fn zmass(&self) -> &Lu<T> {
        &self.zmass
    }

    /// Projection of a velocity field sampled at the nodes onto the
    /// impenetrable space.
    pub fn project_velocity(&self, values: &[[T; 3]]) -> Result<Vec<T>> {
        self.vspace
            .l2_project_values(self.grid.points(), self.grid.weights(), values)
    }
}

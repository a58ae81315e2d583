//! One-dimensional Legendre machinery on the reference interval `[-1, 1]`.

use crate::scalar::Real;

/// `P_n(ξ)`, `P_n′(ξ)`, `P_n″(ξ)` for `n = 0..=degree`.
pub fn legendre_jet<T: Real>(degree: usize, xi: T) -> (Vec<T>, Vec<T>, Vec<T>) {
    let n = degree + 1;
    let mut p = vec![T::zero(); n];
    let mut dp = vec![T::zero(); n];
    let mut ddp = vec![T::zero(); n];
    p[0] = T::one();
    if n > 1 {
        p[1] = xi;
        dp[1] = T::one();
    }
    for m in 1..degree {
        let mf = T::from_usize_lossy(m);
        let c = T::from_usize_lossy(2 * m + 1);
        p[m + 1] = (c * xi * p[m] - mf * p[m - 1]) / (mf + T::one());
        dp[m + 1] = dp[m - 1] + c * p[m];
        ddp[m + 1] = ddp[m - 1] + c * dp[m];
    }
    (p, dp, ddp)
}

/// One-dimensional factor of a tensor-product basis function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    /// `P_j(ξ)`.
    Legendre(usize),
    /// `(1 − ξ²) P_j(ξ)`, vanishing at both ends.
    Bubble(usize),
}

impl Factor {
    /// Polynomial degree of the factor.
    pub fn degree(self) -> usize {
        match self {
            Factor::Legendre(j) => j,
            Factor::Bubble(j) => j + 2,
        }
    }

    fn index(self) -> usize {
        match self {
            Factor::Legendre(j) | Factor::Bubble(j) => j,
        }
    }

    /// Value and first two derivatives with respect to `ξ`, given the
    /// Legendre jet at `ξ`.
    pub fn eval<T: Real>(self, xi: T, jet: &(Vec<T>, Vec<T>, Vec<T>)) -> [T; 3] {
        let j = self.index();
        let (p, dp, ddp) = (jet.0[j], jet.1[j], jet.2[j]);
        match self {
            Factor::Legendre(_) => [p, dp, ddp],
            Factor::Bubble(_) => {
                let b = T::one() - xi * xi;
                let two = T::two();
                [
                    b * p,
                    -two * xi * p + b * dp,
                    -two * p - T::lit(4.0) * xi * dp + b * ddp,
                ]
            }
        }
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let guess = -(std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut xi = T::lit(guess);
        let mut dpn = T::one();
        for _ in 0..100 {
            let (p, dp, _) = legendre_jet(n, xi);
            dpn = dp[n];
            let dx = p[n] / dpn;
            xi = xi - dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                let (_, dp, _) = legendre_jet(n, xi);
                dpn = dp[n];
                break;
            }
        }
        x[i] = xi;
        w[i] = T::two() / ((T::one() - xi * xi) * dpn * dpn);
    }
    (x, w)
}

/// Barycentric weights for Lagrange interpolation through `nodes`.
pub fn barycentric_weights<T: Real>(nodes: &[T]) -> Vec<T> {
    (0..nodes.len())
        .map(|j| {
            let prod = (0..nodes.len())
                .filter(|&k| k != j)
                .fold(T::one(), |acc, k| acc * (nodes[j] - nodes[k]));
            T::one() / prod
        })
        .collect()
}

/// Values of the Lagrange cardinal functions through `nodes` at `x`.
pub fn lagrange_values<T: Real>(nodes: &[T], bary: &[T], x: T) -> Vec<T> {
    if let Some(k) = nodes.iter().position(|&n| n == x) {
        let mut out = vec![T::zero(); nodes.len()];
        out[k] = T::one();
        return out;
    }
    let terms: Vec<T> = nodes.iter().zip(bary).map(|(&n, &b)| b / (x - n)).collect();
    let sum: T = terms.iter().copied().sum();
    terms.into_iter().map(|t| t / sum).collect()
}

/// Differentiation matrix `D[i][j] = ℓ_j′(x_i)` of the Lagrange basis.
pub fn differentiation_matrix<T: Real>(nodes: &[T], bary: &[T]) -> Vec<Vec<T>> {
    let n = nodes.len();
    let mut d = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        let mut diag = T::zero();
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (nodes[i] - nodes[j]);
                d[i][j] = v;
                diag = diag - v;
            }
        }
        d[i][i] = diag;
    }
    d
}

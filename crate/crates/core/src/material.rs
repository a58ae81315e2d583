//! Constitutive layer: swelling law, Ogden-type stored energy written in
//! terms of the total deformation gradient, Cauchy stress, chemical
//! potential, Kelvin–Voigt viscosity with hyperstress, mobility, and the
//! regularizations (cut-off, determinant floor, Yosida penalty) used by the
//! time stepper.
//!
//! Conventions: `Fe = F/λ(z)` is the elastic part of the deformation
//! gradient and `φ̂(F,z) = φ(F/λ(z), z)`.

use crate::error::{Error, Result};
use crate::sampling::Sampler;
use crate::scalar::Real;
use crate::tensor::{Tensor2, Tensor3};

/// Stress-free volumetric stretch as a function of solvent content.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SwellingLaw<T> {
    /// `λ ≡ 1`.
    Constant,
    /// `λ(z) = 1 + βz`.
    Affine { beta: T },
}

impl<T: Real> SwellingLaw<T> {
    /// `(λ(z), λ′(z))` without a positivity check.
    pub fn raw(&self, z: T) -> (T, T) {
        match *self {
            SwellingLaw::Constant => (T::one(), T::zero()),
            SwellingLaw::Affine { beta } => (T::one() + beta * z, beta),
        }
    }

    pub fn lambda_eval(&self, z: T) -> Result<(T, T)> {
        let (l, dl) = self.raw(z);
        if !(l > T::zero()) {
            return Err(Error::NonPositiveStretch {
                z: z.to_f64_lossy(),
                lambda: l.to_f64_lossy(),
            });
        }
        Ok((l, dl))
    }
}

/// `a + b·z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineCoef<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> AffineCoef<T> {
    pub fn constant(a: T) -> Self {
        Self { a, b: T::zero() }
    }

    pub fn zero() -> Self {
        Self::constant(T::zero())
    }

    #[inline]
    pub fn eval(&self, z: T) -> (T, T) {
        (self.a + self.b * z, self.b)
    }
}

/// `h(z) = h0 + h1·z + κ_h z²/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContentEnergy<T> {
    pub h0: T,
    pub h1: T,
    pub kappa_h: T,
}

impl<T: Real> ContentEnergy<T> {
    pub fn zero() -> Self {
        Self {
            h0: T::zero(),
            h1: T::zero(),
            kappa_h: T::zero(),
        }
    }

    #[inline]
    pub fn eval(&self, z: T) -> (T, T) {
        (
            self.h0 + self.h1 * z + T::half() * self.kappa_h * z * z,
            self.h1 + self.kappa_h * z,
        )
    }
}

/// Ogden-type stored energy
/// `φ(Fe,z) = f₁(z)·tr(FeFeᵀ) + f₂(z)·tr Cof(FeFeᵀ) + f₃(z)·K(det Fe − 1)² + κ/det Fe + h(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OgdenEnergy<T> {
    pub f1: AffineCoef<T>,
    pub f2: AffineCoef<T>,
    pub f3: AffineCoef<T>,
    /// `K` in `g₃(J) = K(J−1)²` (Pa).
    pub bulk: T,
    /// Coercivity coefficient (Pa).
    pub kappa: T,
    pub h: ContentEnergy<T>,
}

impl<T: Real> OgdenEnergy<T> {
    /// `φ = κ/det Fe`, whose Eulerian Cauchy stress vanishes identically.
    pub fn inverse_det(kappa: T) -> Self {
        Self {
            f1: AffineCoef::zero(),
            f2: AffineCoef::zero(),
            f3: AffineCoef::zero(),
            bulk: T::zero(),
            kappa,
            h: ContentEnergy::zero(),
        }
    }

    /// Only the content term `h(z)`.
    pub fn content_only(h: ContentEnergy<T>) -> Self {
        Self {
            h,
            ..Self::inverse_det(T::zero())
        }
    }
}

fn trace_cof_sym<T: Real>(c: &Tensor2<T>) -> (T, Tensor2<T>) {
    // tr Cof(C) and its derivative with respect to a symmetric C.
    let d = c.dim();
    match d {
        1 => (T::one(), Tensor2::zeros(1)),
        2 => (c.trace(), Tensor2::identity(2)),
        _ => {
            let tr = c.trace();
            let val = T::half() * (tr * tr - (*c * *c).trace());
            (val, Tensor2::scalar(3, tr) - *c)
        }
    }
}

impl<T: Real> OgdenEnergy<T> {
    pub fn phi(&self, fe: &Tensor2<T>, z: T) -> Result<T> {
        let j = fe.det();
        if !(j > T::zero()) {
            return Err(Error::DegenerateState {
                det_f: j.to_f64_lossy(),
            });
        }
        let c = *fe * fe.transpose();
        let (f1, _) = self.f1.eval(z);
        let (f2, _) = self.f2.eval(z);
        let (f3, _) = self.f3.eval(z);
        let (h, _) = self.h.eval(z);
        let (tcof, _) = trace_cof_sym(&c);
        let jm1 = j - T::one();
        Ok(f1 * c.trace() + f2 * tcof + f3 * self.bulk * jm1 * jm1 + self.kappa / j + h)
    }

    /// `(∂φ/∂Fe, ∂φ/∂z)`.
    pub fn dphi(&self, fe: &Tensor2<T>, z: T) -> Result<(Tensor2<T>, T)> {
        let j = fe.det();
        if !(j > T::zero()) {
            return Err(Error::DegenerateState {
                det_f: j.to_f64_lossy(),
            });
        }
        let c = *fe * fe.transpose();
        let cof = fe.cof();
        let (f1, df1) = self.f1.eval(z);
        let (f2, df2) = self.f2.eval(z);
        let (f3, df3) = self.f3.eval(z);
        let (_, dh) = self.h.eval(z);
        let (tcof, dtcof) = trace_cof_sym(&c);
        let jm1 = j - T::one();
        let two = T::two();
        let d_fe = *fe * (two * f1) + dtcof * *fe * (two * f2) + cof * (two * f3 * self.bulk * jm1)
            - cof * (self.kappa / (j * j));
        let d_z = df1 * c.trace() + df2 * tcof + df3 * self.bulk * jm1 * jm1 + dh;
        Ok((d_fe, d_z))
    }
}

/// Kelvin–Voigt dissipation `ζ(z,e) = η(z)|e|² + η₂(√(1+|e|²) − 1)` with
/// `η(z) = η₀ + η₁z`, plus the hyperviscous potential `ν/p |∇e|^p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dissipation<T> {
    pub eta0: T,
    pub eta1: T,
    pub eta2: T,
    /// Hyperviscosity coefficient `ν`.
    pub nu: T,
    /// Hyperviscosity exponent `p ≥ 2`.
    pub p: T,
}

impl<T: Real> Dissipation<T> {
    pub fn quadratic(eta: T, nu: T, p: T) -> Self {
        Self {
            eta0: eta,
            eta1: T::zero(),
            eta2: T::zero(),
            nu,
            p,
        }
    }

    #[inline]
    pub fn eta(&self, z: T) -> T {
        self.eta0 + self.eta1 * z
    }

    pub fn zeta(&self, z: T, e: &Tensor2<T>) -> T {
        let e2 = e.ddot(e);
        self.eta(z) * e2 + self.eta2 * ((T::one() + e2).sqrt() - T::one())
    }

    /// `ζ′_e(z; e)`.
    pub fn zeta_prime(&self, z: T, e: &Tensor2<T>) -> Tensor2<T> {
        let s = (T::one() + e.ddot(e)).sqrt();
        *e * (T::two() * self.eta(z) + self.eta2 / s)
    }

    /// Directional derivative of `ζ′_e(z; ·)` at `e` along `de`.
    pub fn zeta_second(&self, z: T, e: &Tensor2<T>, de: &Tensor2<T>) -> Tensor2<T> {
        let s2 = T::one() + e.ddot(e);
        let s = s2.sqrt();
        let mut out = *de * (T::two() * self.eta(z) + self.eta2 / s);
        if self.eta2 != T::zero() {
            out -= *e * (self.eta2 * e.ddot(de) / (s2 * s));
        }
        out
    }

    /// `𝔥 = ν|G|^{p−2}G` for `G = ∇e(v)`.
    pub fn hyperstress(&self, g: &Tensor3<T>) -> Tensor3<T> {
        let two = T::two();
        if self.p == two {
            return g.scale(self.nu);
        }
        let n = g.norm();
        if n == T::zero() {
            return Tensor3::zeros(g.dim());
        }
        g.scale(self.nu * n.powf(self.p - two))
    }

    /// Directional derivative of the hyperstress at `g` along `dg`.
    pub fn hyperstress_tangent(&self, g: &Tensor3<T>, dg: &Tensor3<T>) -> Tensor3<T> {
        let two = T::two();
        if self.p == two {
            return dg.scale(self.nu);
        }
        let n2 = g.dddot(g);
        if n2 == T::zero() {
            return Tensor3::zeros(g.dim());
        }
        let n = n2.sqrt();
        let a = self.nu * n.powf(self.p - two);
        let b = a * (self.p - two) * g.dddot(dg) / n2;
        dg.scale(a) + g.scale(b)
    }

    /// Viscous dissipation rate `ζ′_e:e + ν|∇e|^p`.
    pub fn dissipation_rate(&self, z: T, e: &Tensor2<T>, g: &Tensor3<T>) -> T {
        self.zeta_prime(z, e).ddot(e) + self.nu * g.norm().powf(self.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MobilityKind<T> {
    /// `m ≡ m₀`.
    Constant,
    /// `m = m₀ / det Fe`.
    InverseDet,
    /// `m = m₀(1 + s·z)`.
    AffineContent { slope: T },
}

/// Diffusant mobility `m(Fe, z)` (m³·s/kg), floored at `floor` when evaluated
/// for the solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mobility<T> {
    pub m0: T,
    pub kind: MobilityKind<T>,
    pub floor: T,
}

impl<T: Real> Mobility<T> {
    pub fn constant(m0: T) -> Self {
        Self {
            m0,
            kind: MobilityKind::Constant,
            floor: T::zero(),
        }
    }

    /// Unfloored `m(Fe, z)`.
    pub fn raw(&self, fe: &Tensor2<T>, z: T) -> T {
        match self.kind {
            MobilityKind::Constant => self.m0,
            MobilityKind::InverseDet => self.m0 / fe.det(),
            MobilityKind::AffineContent { slope } => self.m0 * (T::one() + slope * z),
        }
    }
}

/// Parameters of the regularized scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regularization<T> {
    /// Cut-off parameter `ε` for `χ_ε` and `det_ε`.
    pub eps: T,
    /// Yosida stiffness `k` (Pa).
    pub yosida_k: T,
    /// Parabolic coefficient of the F-transport regularization.
    pub eps_f: T,
    /// Exponent of the F-transport regularization, `r > 2`.
    pub r: T,
}

impl<T: Real> Regularization<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > T::zero()) {
            return Err(Error::invalid("regularization.epsilon", "must be > 0"));
        }
        if !(self.yosida_k > T::zero()) {
            return Err(Error::invalid("regularization.yosida_k", "must be > 0"));
        }
        if !(self.eps_f >= T::zero()) {
            return Err(Error::invalid("regularization.eps_f", "must be >= 0"));
        }
        if !(self.r > T::two()) {
            return Err(Error::invalid("regularization.r", "must be > 2"));
        }
        Ok(())
    }
}

/// Yosida approximation of the normal cone to `[0,1]`.
pub fn yosida<T: Real>(z: T, k: T) -> T {
    if z > T::one() {
        k * (z - T::one())
    } else if z < T::zero() {
        k * z
    } else {
        T::zero()
    }
}

/// Derivative of [`yosida`] in `z` (one-sided value `0` at the kinks).
pub fn yosida_slope<T: Real>(z: T, k: T) -> T {
    if z > T::one() || z < T::zero() {
        k
    } else {
        T::zero()
    }
}

/// Potential of [`yosida`]: `k/2·dist(z,[0,1])²`.
pub fn yosida_potential<T: Real>(z: T, k: T) -> T {
    let d = if z > T::one() {
        z - T::one()
    } else if z < T::zero() {
        -z
    } else {
        T::zero()
    };
    T::half() * k * d * d
}

/// Clamped cubic smoothstep and its derivative.
fn smoothstep<T: Real>(u: T) -> (T, T) {
    if u <= T::zero() {
        (T::zero(), T::zero())
    } else if u >= T::one() {
        (T::one(), T::zero())
    } else {
        let three = T::lit(3.0);
        let six = T::lit(6.0);
        (u * u * (three - T::two() * u), six * u * (T::one() - u))
    }
}

/// Cut-off `χ_ε(F) = S((2 det F − ε)/ε)·S(2 − ε|F|)`.
pub fn cutoff_chi<T: Real>(f: &Tensor2<T>, eps: T) -> T {
    let (s1, _) = smoothstep((T::two() * f.det() - eps) / eps);
    if s1 == T::zero() {
        return T::zero();
    }
    let (s2, _) = smoothstep(T::two() - eps * f.norm());
    s1 * s2
}

/// `χ_ε(F)` together with `∂χ_ε/∂F`.
pub fn cutoff_chi_grad<T: Real>(f: &Tensor2<T>, eps: T) -> (T, Tensor2<T>) {
    let d = f.dim();
    let (s1, ds1) = smoothstep((T::two() * f.det() - eps) / eps);
    let n = f.norm();
    let (s2, ds2) = smoothstep(T::two() - eps * n);
    let chi = s1 * s2;
    let mut grad = Tensor2::zeros(d);
    if ds1 != T::zero() {
        grad += f.cof() * (ds1 * s2 * T::two() / eps);
    }
    if ds2 != T::zero() && n > T::zero() {
        grad -= *f * (s1 * ds2 * eps / n);
    }
    (chi, grad)
}

/// `det_ε F = max(det F, ε)`.
pub fn det_floor<T: Real>(f: &Tensor2<T>, eps: T) -> T {
    f.det().max(eps)
}

/// Regularized pointwise quantities used by the scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedPoint<T> {
    pub chi: T,
    /// `χ_ε φ̂`.
    pub phi: T,
    /// `T_ε = [φ̂_ε]′_F Fᵀ + φ̂_ε I`.
    pub stress: Tensor2<T>,
    /// `[φ̂_ε]′_z = χ_ε ∂_z φ̂` (without the Yosida term).
    pub dz_phi: T,
}

/// Complete material description; immutable once built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialModel<T> {
    pub dim: usize,
    pub swelling: SwellingLaw<T>,
    pub energy: OgdenEnergy<T>,
    pub dissipation: Dissipation<T>,
    pub mobility: Mobility<T>,
}

impl<T: Real> MaterialModel<T> {
    /// Default instance: `λ = 1 + 0.3z`, `f₁ = μ_s(1 − z/2)`, `g₃ = K(J−1)²`,
    /// `h = κ_h z²/2`, quadratic viscosity with cubic hyperviscosity.
    pub fn default_instance(dim: usize) -> Self {
        let l = T::lit;
        Self {
            dim,
            swelling: SwellingLaw::Affine { beta: l(0.3) },
            energy: OgdenEnergy {
                f1: AffineCoef {
                    a: l(1.0),
                    b: l(-0.5),
                },
                f2: AffineCoef::zero(),
                f3: AffineCoef::constant(l(1.0)),
                bulk: l(2.0),
                kappa: l(0.1),
                h: ContentEnergy {
                    h0: l(0.0),
                    h1: l(0.0),
                    kappa_h: l(4.0),
                },
            },
            dissipation: Dissipation {
                eta0: l(0.05),
                eta1: l(0.0),
                eta2: l(0.0),
                nu: l(1e-4),
                p: l(3.0),
            },
            mobility: Mobility {
                m0: l(0.05),
                kind: MobilityKind::Constant,
                floor: l(1e-8),
            },
        }
    }

    /// Models that each violate exactly one structural hypothesis, paired
    /// with the name of the check they are built to fail:
    ///
    /// - `λ(z) = 1 − 2z` vanishes at `z = 1/2` (swelling positivity);
    /// - a content baseline `h₀ = −10` drives `φ` below `κ/det Fe` (coercivity);
    /// - `h(z) = 1 − z²/2` is concave in `z` (strong convexity).
    pub fn counterexamples(dim: usize) -> [(&'static str, Self); 3] {
        let l = T::lit;
        let base = Self::default_instance(dim);
        let mut shrinking = base;
        shrinking.swelling = SwellingLaw::Affine { beta: l(-2.0) };
        let mut negative = base;
        negative.energy.h.h0 = l(-10.0);
        let mut concave = base;
        concave.energy.h = ContentEnergy {
            h0: l(1.0),
            h1: l(0.0),
            kappa_h: l(-1.0),
        };
        [
            (CHECK_SWELLING, shrinking),
            (CHECK_COERCIVITY, negative),
            (CHECK_CONVEXITY, concave),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::invalid("domain.dim", "must be 1, 2 or 3"));
        }
        let d = &self.dissipation;
        if !(d.nu >= T::zero()) {
            return Err(Error::invalid("material.nu", "must be >= 0"));
        }
        if !(d.p >= T::two()) {
            return Err(Error::invalid("material.p", "must be >= 2"));
        }
        if !(d.eta2 >= T::zero()) {
            return Err(Error::invalid("material.eta2", "must be >= 0"));
        }
        if !(self.energy.kappa >= T::zero()) {
            return Err(Error::invalid("material.kappa", "must be >= 0"));
        }
        if !(self.mobility.m0 > T::zero()) {
            return Err(Error::invalid("material.mobility", "must be > 0"));
        }
        if !(self.mobility.floor >= T::zero()) {
            return Err(Error::invalid("material.mobility_floor", "must be >= 0"));
        }
        Ok(())
    }

    pub fn lambda_eval(&self, z: T) -> Result<(T, T)> {
        self.swelling.lambda_eval(z)
    }

    fn elastic_part(&self, f: &Tensor2<T>, z: T) -> Result<(Tensor2<T>, T, T)> {
        let det = f.det();
        if !(det > T::zero()) {
            return Err(Error::DegenerateState {
                det_f: det.to_f64_lossy(),
            });
        }
        let (l, dl) = self.swelling.lambda_eval(z)?;
        Ok((*f * (T::one() / l), l, dl))
    }

    /// `φ̂(F,z) = φ(F/λ(z), z)`.
    pub fn phi_hat(&self, f: &Tensor2<T>, z: T) -> Result<T> {
        let (fe, _, _) = self.elastic_part(f, z)?;
        self.energy.phi(&fe, z)
    }

    /// `(∂_F φ̂, ∂_z φ̂)`; the latter is the chain rule
    /// `φ_z − (λ′/λ) φ_Fe : Fe`.
    pub fn dphi_hat(&self, f: &Tensor2<T>, z: T) -> Result<(Tensor2<T>, T)> {
        let (fe, l, dl) = self.elastic_part(f, z)?;
        let (d_fe, d_z) = self.energy.dphi(&fe, z)?;
        Ok((d_fe * (T::one() / l), d_z - dl / l * d_fe.ddot(&fe)))
    }

    /// Conservative Cauchy stress `∂_F φ̂ Fᵀ + φ̂ I`.
    pub fn cauchy_stress(&self, f: &Tensor2<T>, z: T) -> Result<Tensor2<T>> {
        let phi = self.phi_hat(f, z)?;
        let (d_f, _) = self.dphi_hat(f, z)?;
        Ok(d_f * f.transpose() + Tensor2::scalar(f.dim(), phi))
    }

    /// `μ = χ_ε(F) ∂_z φ̂(F,z) + 𝒩_k(z)`.
    pub fn chemical_potential(&self, f: &Tensor2<T>, z: T, reg: &Regularization<T>) -> Result<T> {
        let (_, dz) = self.dphi_hat(f, z)?;
        Ok(cutoff_chi(f, reg.eps) * dz + yosida(z, reg.yosida_k))
    }

    /// Regularized energy, stress and driving force; never fails on
    /// degenerate `F` because the cut-off vanishes there.
    pub fn regularized(&self, f: &Tensor2<T>, z: T, eps: T) -> Result<RegularizedPoint<T>> {
        let (chi, dchi) = cutoff_chi_grad(f, eps);
        let d = f.dim();
        if chi == T::zero() && dchi.max_abs() == T::zero() {
            return Ok(RegularizedPoint {
                chi,
                phi: T::zero(),
                stress: Tensor2::zeros(d),
                dz_phi: T::zero(),
            });
        }
        let phi = self.phi_hat(f, z)?;
        let (d_f, d_z) = self.dphi_hat(f, z)?;
        let ft = f.transpose();
        let mut stress = (d_f * ft + Tensor2::scalar(d, phi)) * chi;
        if dchi.max_abs() != T::zero() {
            stress += dchi * ft * phi;
        }
        Ok(RegularizedPoint {
            chi,
            phi: chi * phi,
            stress,
            dz_phi: chi * d_z,
        })
    }

    pub fn viscous_stress(&self, z: T, e: &Tensor2<T>) -> Tensor2<T> {
        self.dissipation.zeta_prime(z, e)
    }

    pub fn hyperstress(&self, grad_e: &Tensor3<T>) -> Tensor3<T> {
        self.dissipation.hyperstress(grad_e)
    }

    /// `m̂(F,z) = max(m(F/λ(z), z), floor)`.
    pub fn mobility_hat(&self, f: &Tensor2<T>, z: T) -> Result<T> {
        let (fe, _, _) = self.elastic_part(f, z)?;
        Ok(self.mobility.raw(&fe, z).max(self.mobility.floor))
    }
}

/// Outcome of one assumption check.
#[derive(Clone, Debug, PartialEq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not evaluable because a prerequisite check failed.
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionCheck {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.name)
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl std::fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "PASS",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "SKIP",
            };
            writeln!(f, "[{tag}] {:<22} {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

pub const CHECK_COERCIVITY: &str = "coercivity";
pub const CHECK_CONVEXITY: &str = "strong_convexity_in_z";
pub const CHECK_DISSIPATION: &str = "dissipation_bounds";
pub const CHECK_SWELLING: &str = "swelling_positive";
pub const CHECK_MOBILITY: &str = "mobility_positive";
pub const CHECK_EXPONENT: &str = "hyperviscosity_exponent";

/// Random `F` with `det F` drawn from `[lo, hi]` (log-uniform).
pub fn sample_deformation<T: Real>(rng: &mut Sampler, dim: usize, lo: f64, hi: f64) -> Tensor2<T> {
    loop {
        let f = Tensor2::<f64>::from_fn(dim, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base + rng.uniform(-0.5, 0.5)
        });
        let det = f.det();
        if det < 0.2 {
            continue;
        }
        let target = (lo.ln() + (hi.ln() - lo.ln()) * rng.next_f64()).exp();
        let s = (target / det).powf(1.0 / dim as f64);
        let g = f * s;
        return Tensor2::from_fn(dim, |i, j| T::lit(g[(i, j)]));
    }
}

impl<T: Real> MaterialModel<T> {
    /// Samples the structural hypotheses on the constitutive data and
    /// reports each one; failures are entries, not errors.
    pub fn check_assumptions(&self, sample_budget: usize) -> AssumptionReport {
        let n = sample_budget.max(8);
        let d = self.dim;
        let mut rng = Sampler::new(0x5eed_0fa5_5e);
        let mut checks = Vec::new();
        let lit = T::lit;

        // inf λ > 0 and bounded λ′ on [0,1].
        let mut inf_l = f64::INFINITY;
        let mut sup_dl = 0.0f64;
        for i in 0..=n {
            let z = lit(i as f64 / n as f64);
            let (l, dl) = self.swelling.raw(z);
            inf_l = inf_l.min(l.to_f64_lossy());
            sup_dl = sup_dl.max(dl.to_f64_lossy().abs());
        }
        let swelling_ok = inf_l > 0.0 && sup_dl.is_finite();
        checks.push(AssumptionCheck {
            name: CHECK_SWELLING,
            status: if swelling_ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!("inf lambda = {inf_l:.6e}, sup |lambda'| = {sup_dl:.6e}"),
        });

        // φ(Fe,z) ≥ κ/det Fe with κ > 0.
        let kappa = self.energy.kappa.to_f64_lossy();
        let mut worst = f64::INFINITY;
        for _ in 0..n {
            let fe: Tensor2<T> = sample_deformation(&mut rng, d, 0.05, 20.0);
            let z = lit(rng.next_f64());
            if let Ok(phi) = self.energy.phi(&fe, z) {
                let margin = phi.to_f64_lossy() - kappa / fe.det().to_f64_lossy();
                worst = worst.min(margin);
            }
        }
        let coercive = kappa > 0.0 && worst >= -1e-12 * kappa.max(1.0);
        checks.push(AssumptionCheck {
            name: CHECK_COERCIVITY,
            status: if coercive {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!("kappa = {kappa:.6e}, min(phi - kappa/det Fe) = {worst:.6e}"),
        });

        // z ↦ φ̂(F,z) strongly convex with modulus min(κ, κ_h).
        if swelling_ok {
            let modulus = kappa.min(self.energy.h.kappa_h.to_f64_lossy());
            let mut worst_gap = f64::INFINITY;
            let mut evaluated = 0usize;
            for _ in 0..n {
                let f: Tensor2<T> = sample_deformation(&mut rng, d, 0.2, 5.0);
                let z0 = rng.next_f64();
                let z1 = rng.next_f64();
                let theta = rng.next_f64();
                let zm = theta * z1 + (1.0 - theta) * z0;
                let vals = (
                    self.phi_hat(&f, lit(zm)),
                    self.phi_hat(&f, lit(z0)),
                    self.phi_hat(&f, lit(z1)),
                );
                if let (Ok(pm), Ok(p0), Ok(p1)) = vals {
                    let (pm, p0, p1) = (pm.to_f64_lossy(), p0.to_f64_lossy(), p1.to_f64_lossy());
                    let rhs = theta * p1 + (1.0 - theta) * p0
                        - 0.5 * modulus * theta * (1.0 - theta) * (z1 - z0).powi(2);
                    let scale = 1.0 + p0.abs() + p1.abs();
                    worst_gap = worst_gap.min((rhs - pm) / scale);
                    evaluated += 1;
                }
            }
            let ok = modulus > 0.0 && evaluated > 0 && worst_gap >= -1e-12;
            checks.push(AssumptionCheck {
                name: CHECK_CONVEXITY,
                status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
                detail: format!(
                    "modulus = {modulus:.6e}, worst relative margin = {worst_gap:.6e} over {evaluated} samples"
                ),
            });
        } else {
            checks.push(AssumptionCheck {
                name: CHECK_CONVEXITY,
                status: CheckStatus::Skipped,
                detail: "requires a positive swelling stretch".into(),
            });
        }

        // ε̄|e|² ≤ ζ(z,e) ≤ (1+|e|²)/ε̄ and convexity of ζ(z,·).
        let mut lower = f64::INFINITY;
        let mut upper = 0.0f64;
        let mut convex = true;
        for i in 0..n {
            let z = lit(rng.next_f64());
            let mag = 10f64.powf(rng.uniform(-3.0, 3.0));
            let e = Tensor2::<T>::from_fn(d, |_, _| lit(rng.uniform(-1.0, 1.0))).sym();
            let e = e * (lit(mag) / e.norm().max(lit(1e-300)));
            let zeta = self.dissipation.zeta(z, &e).to_f64_lossy();
            let e2 = e.ddot(&e).to_f64_lossy();
            lower = lower.min(zeta / e2);
            upper = upper.max(zeta / (1.0 + e2));
            if i % 2 == 0 {
                let e1 = Tensor2::<T>::from_fn(d, |_, _| lit(rng.uniform(-2.0, 2.0))).sym();
                let mid = (e + e1) * T::half();
                let lhs = self.dissipation.zeta(z, &mid).to_f64_lossy();
                let rhs = 0.5 * (zeta + self.dissipation.zeta(z, &e1).to_f64_lossy());
                if lhs > rhs + 1e-12 * (1.0 + rhs.abs()) {
                    convex = false;
                }
            }
        }
        // Endpoints of the content range are where an affine η degenerates.
        for z in [0.0, 1.0] {
            let e = Tensor2::<T>::scalar(d, lit(1e-3));
            let zeta = self.dissipation.zeta(lit(z), &e).to_f64_lossy();
            lower = lower.min(zeta / e.ddot(&e).to_f64_lossy());
        }
        let eps_bar = lower.min(if upper > 0.0 {
            1.0 / upper
        } else {
            f64::INFINITY
        });
        let diss_ok = convex && eps_bar > 1e-12 && upper.is_finite();
        checks.push(AssumptionCheck {
            name: CHECK_DISSIPATION,
            status: if diss_ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!(
                "inf zeta/|e|^2 = {lower:.6e}, sup zeta/(1+|e|^2) = {upper:.6e}, convex = {convex}"
            ),
        });

        // inf m > 0 over sampled (Fe, z).
        let mut inf_m = f64::INFINITY;
        for i in 0..n {
            let fe: Tensor2<T> = sample_deformation(&mut rng, d, 0.05, 20.0);
            let z = if i < 2 {
                lit(i as f64)
            } else {
                lit(rng.next_f64())
            };
            inf_m = inf_m.min(self.mobility.raw(&fe, z).to_f64_lossy());
        }
        checks.push(AssumptionCheck {
            name: CHECK_MOBILITY,
            status: if inf_m > 0.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!("inf m = {inf_m:.6e}"),
        });

        let p = self.dissipation.p.to_f64_lossy();
        let nu = self.dissipation.nu.to_f64_lossy();
        checks.push(AssumptionCheck {
            name: CHECK_EXPONENT,
            status: if p > d as f64 && nu > 0.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            detail: format!("p = {p}, d = {d}, nu = {nu:.6e}"),
        });

        AssumptionReport { checks }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = MaterialModel<f64>;

    fn with_energy(energy: OgdenEnergy<f64>, swelling: SwellingLaw<f64>) -> M {
        M {
            energy,
            swelling,
            ..M::default_instance(2)
        }
    }

    fn reg(eps: f64, k: f64) -> Regularization<f64> {
        Regularization {
            eps,
            yosida_k: k,
            eps_f: 0.0,
            r: 3.0,
        }
    }

    #[test]
    fn lambda_cases() {
        assert_eq!(
            SwellingLaw::<f64>::Constant.lambda_eval(0.7).unwrap(),
            (1.0, 0.0)
        );
        assert_eq!(
            SwellingLaw::Affine { beta: 0.3 }.lambda_eval(0.0).unwrap(),
            (1.0, 0.3)
        );
        let bad = SwellingLaw::Affine { beta: -2.0 };
        assert!(matches!(
            bad.lambda_eval(0.6),
            Err(Error::NonPositiveStretch { .. })
        ));
        let law = SwellingLaw::Affine { beta: 0.3f64 };
        let h = 1e-6;
        for z in [0.1, 0.5, 0.9] {
            let fd = (law.raw(z + h).0 - law.raw(z - h).0) / (2.0 * h);
            assert!((fd - law.raw(z).1).abs() <= 1e-8 * law.raw(z).1.abs());
        }
    }

    #[test]
    fn phi_hat_identity_swelling_is_phi() {
        let m = with_energy(M::default_instance(2).energy, SwellingLaw::Constant);
        let f = Tensor2::from_rows(&[&[1.1, 0.2], &[-0.1, 0.9]]);
        for z in [0.0, 0.3, 1.0] {
            assert_eq!(m.phi_hat(&f, z).unwrap(), m.energy.phi(&f, z).unwrap());
        }
    }

    #[test]
    fn phi_hat_inverse_det_scales_with_lambda() {
        let kappa = 0.7;
        let m = with_energy(
            OgdenEnergy::inverse_det(kappa),
            SwellingLaw::Affine { beta: 0.4 },
        );
        let f = Tensor2::from_rows(&[&[1.3, 0.2], &[0.1, 0.8]]);
        let z = 0.6;
        let l = 1.0 + 0.4 * z;
        let expect = kappa * l * l / f.det();
        assert!((m.phi_hat(&f, z).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn phi_hat_at_identity_is_direct_sum() {
        let m = M::default_instance(2);
        let z = 0.0;
        let e = &m.energy;
        let expect = e.f1.eval(z).0 * 2.0 + e.f2.eval(z).0 * 2.0 + 0.0 + e.kappa + e.h.eval(z).0;
        assert!((m.phi_hat(&Tensor2::identity(2), z).unwrap() - expect).abs() < 1e-15);
        let bad = Tensor2::diag(&[-1.0, 1.0]);
        assert!(matches!(
            m.phi_hat(&bad, 0.5),
            Err(Error::DegenerateState { .. })
        ));
    }

    #[test]
    fn dphi_hat_closed_forms() {
        let h = ContentEnergy {
            h0: 0.0,
            h1: 0.2,
            kappa_h: 3.0,
        };
        let m = with_energy(
            OgdenEnergy::content_only(h),
            SwellingLaw::Affine { beta: 0.3 },
        );
        let f = Tensor2::from_rows(&[&[1.2, 0.1], &[0.0, 0.7]]);
        let (df, dz) = m.dphi_hat(&f, 0.4).unwrap();
        assert_eq!(df, Tensor2::zeros(2));
        assert!((dz - h.eval(0.4).1).abs() < 1e-15);

        let kappa = 0.9;
        let beta = 0.3;
        let m = with_energy(
            OgdenEnergy::inverse_det(kappa),
            SwellingLaw::Affine { beta },
        );
        let z = 0.5;
        let l = 1.0 + beta * z;
        let (df, dz) = m.dphi_hat(&f, z).unwrap();
        let expect_f = f.inv().unwrap().transpose() * (-kappa * l * l / f.det());
        let expect_z = kappa * 2.0 * l * beta / f.det();
        assert!((df - expect_f).max_abs() < 1e-13);
        assert!((dz - expect_z).abs() < 1e-13);
    }

    #[test]
    fn cauchy_stress_closed_forms() {
        let f = Tensor2::from_rows(&[&[1.2, 0.3], &[-0.2, 0.8]]);
        let m = with_energy(
            OgdenEnergy::inverse_det(1.3),
            SwellingLaw::Affine { beta: 0.3 },
        );
        assert!(m.cauchy_stress(&f, 0.4).unwrap().max_abs() < 1e-14);

        let mu_s = 1.7;
        let mut energy = OgdenEnergy::inverse_det(0.0);
        energy.f1 = AffineCoef::constant(mu_s / 2.0);
        let m = with_energy(energy, SwellingLaw::Constant);
        let t = m.cauchy_stress(&f, 0.2).unwrap();
        let expect = f * f.transpose() * mu_s + Tensor2::scalar(2, mu_s / 2.0 * f.ddot(&f));
        assert!((t - expect).max_abs() < 1e-14);

        let h = ContentEnergy {
            h0: 0.5,
            h1: 0.0,
            kappa_h: 2.0,
        };
        let m = with_energy(OgdenEnergy::content_only(h), SwellingLaw::Constant);
        let t = m.cauchy_stress(&f, 0.3).unwrap();
        assert!((t - Tensor2::scalar(2, h.eval(0.3).0)).max_abs() < 1e-15);
    }

    #[test]
    fn chemical_potential_cases() {
        let h = ContentEnergy {
            h0: 0.0,
            h1: 0.0,
            kappa_h: 2.0,
        };
        let m = with_energy(OgdenEnergy::content_only(h), SwellingLaw::Constant);
        let f = Tensor2::identity(2);
        let r = reg(0.1, 100.0);
        assert_eq!(m.chemical_potential(&f, 0.5, &r).unwrap(), h.eval(0.5).1);

        let m = with_energy(OgdenEnergy::inverse_det(1.0), SwellingLaw::Constant);
        assert!((m.chemical_potential(&f, 1.05, &r).unwrap() - 5.0).abs() < 1e-12);
        assert!((m.chemical_potential(&f, -0.1, &r).unwrap() + 10.0).abs() < 1e-12);
    }

    #[test]
    fn yosida_cases() {
        assert_eq!(yosida(0.5, 10.0), 0.0);
        assert!((yosida(1.2f64, 10.0) - 2.0).abs() < 1e-14);
        assert_eq!(yosida(0.0, 10.0), 0.0);
        assert_eq!(yosida(1.0, 10.0), 0.0);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=400 {
            let z = -1.0 + i as f64 * 0.0075;
            let y = yosida(z, 7.0);
            assert!(y >= prev);
            prev = y;
            assert_eq!(y == 0.0, (0.0..=1.0).contains(&z));
        }
    }

    #[test]
    fn cutoff_branches() {
        assert_eq!(cutoff_chi(&Tensor2::<f64>::identity(2), 0.1), 1.0);
        assert_eq!(cutoff_chi(&Tensor2::diag(&[0.2, 0.2]), 0.1), 0.0);
        let chi: f64 = cutoff_chi(&Tensor2::diag(&[0.3, 0.25]), 0.1);
        assert!((chi - 0.5).abs() < 1e-12);
        // |F| ≥ 2/ε branch.
        assert_eq!(cutoff_chi(&Tensor2::diag(&[25.0, 1.0]), 0.1), 0.0);
    }

    #[test]
    fn cutoff_gradient_matches_finite_differences() {
        let mut rng = Sampler::new(3);
        let eps = 0.3;
        for _ in 0..200 {
            let f: Tensor2<f64> = sample_deformation(&mut rng, 2, 0.05, 8.0);
            let (_, g) = cutoff_chi_grad(&f, eps);
            let h = 1e-7;
            for i in 0..2 {
                for j in 0..2 {
                    let mut fp = f;
                    fp[(i, j)] += h;
                    let mut fm = f;
                    fm[(i, j)] -= h;
                    let fd = (cutoff_chi(&fp, eps) - cutoff_chi(&fm, eps)) / (2.0 * h);
                    assert!(
                        (fd - g[(i, j)]).abs() < 1e-4 * (1.0 + g.max_abs()),
                        "{fd} vs {}",
                        g[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn det_floor_cases() {
        assert_eq!(det_floor(&Tensor2::diag(&[2.0, 1.0]), 0.01), 2.0);
        assert_eq!(det_floor(&Tensor2::diag(&[-0.5, 1.0]), 0.01), 0.01);
        assert_eq!(det_floor(&Tensor2::diag(&[0.01, 1.0]), 0.01), 0.01);
    }

    #[test]
    fn viscous_stress_cases() {
        let eta = 0.8;
        let m = M {
            dissipation: Dissipation::quadratic(eta, 0.0, 3.0),
            ..M::default_instance(2)
        };
        assert_eq!(m.viscous_stress(0.3, &Tensor2::zeros(2)), Tensor2::zeros(2));
        let e = Tensor2::from_rows(&[&[0.3, -0.1], &[-0.1, 0.5]]);
        assert!((m.viscous_stress(0.3, &e) - e * (2.0 * eta)).max_abs() < 1e-15);

        let m = M {
            dissipation: Dissipation {
                eta0: 0.2,
                eta1: 0.5,
                eta2: 1.5,
                nu: 0.0,
                p: 3.0,
            },
            ..M::default_instance(2)
        };
        let mut rng = Sampler::new(11);
        for _ in 0..100 {
            let e1 = Tensor2::from_fn(2, |_, _| rng.uniform(-2.0, 2.0)).sym();
            let e2 = Tensor2::from_fn(2, |_, _| rng.uniform(-2.0, 2.0)).sym();
            let z = rng.next_f64();
            let s = m.viscous_stress(z, &e1) - m.viscous_stress(z, &e2);
            assert!(s.ddot(&(e1 - e2)) >= 0.0);
        }
    }

    #[test]
    fn zeta_second_matches_finite_differences() {
        let d = Dissipation {
            eta0: 0.2,
            eta1: 0.5,
            eta2: 1.5,
            nu: 0.0,
            p: 3.0,
        };
        let e = Tensor2::from_rows(&[&[0.3, -0.4], &[-0.4, 0.9]]);
        let de = Tensor2::from_rows(&[&[0.1, 0.2], &[0.2, -0.3]]);
        let h = 1e-6;
        let fd = (d.zeta_prime(0.4, &(e + de * h)) - d.zeta_prime(0.4, &(e - de * h))) * (0.5 / h);
        assert!((fd - d.zeta_second(0.4, &e, &de)).max_abs() < 1e-8);
    }

    #[test]
    fn hyperstress_cases() {
        let g = Tensor3::from_fn(2, |i, j, k| 0.1 * (i + j) as f64 - 0.3 * k as f64 + 0.05).sym12();
        let d3 = Dissipation::quadratic(0.1, 1.0, 3.0);
        assert_eq!(d3.hyperstress(&Tensor3::zeros(2)), Tensor3::zeros(2));
        let d2 = Dissipation::quadratic(0.1, 0.7, 2.0);
        assert!((d2.hyperstress(&g) - g.scale(0.7)).norm() < 1e-15);
        let unit = g.scale(1.0 / g.norm());
        assert!((d3.hyperstress(&unit) - unit).norm() < 1e-14);
        let nu = 0.4;
        let d = Dissipation::quadratic(0.1, nu, 3.5);
        assert!((d.hyperstress(&g).norm() - nu * g.norm().powf(2.5)).abs() < 1e-14);

        let dg = Tensor3::from_fn(2, |i, j, k| 0.02 * (i * 3 + j * 2 + k) as f64 - 0.07).sym12();
        let h = 1e-6;
        let fd =
            (d.hyperstress(&(g + dg.scale(h))) - d.hyperstress(&(g - dg.scale(h)))).scale(0.5 / h);
        assert!((fd - d.hyperstress_tangent(&g, &dg)).norm() < 1e-8);
    }

    #[test]
    fn mobility_hat_cases() {
        let f = Tensor2::from_rows(&[&[1.2, 0.1], &[0.3, 0.9]]);
        let mut m = M::default_instance(2);
        m.mobility = Mobility::constant(0.4);
        assert_eq!(m.mobility_hat(&f, 0.3).unwrap(), 0.4);
        m.swelling = SwellingLaw::Constant;
        m.mobility = Mobility {
            m0: 0.4,
            kind: MobilityKind::InverseDet,
            floor: 0.0,
        };
        assert_eq!(m.mobility_hat(&f, 0.3).unwrap(), m.mobility.raw(&f, 0.3));
        m.swelling = SwellingLaw::Affine { beta: 0.3 };
        let l: f64 = 1.0 + 0.3 * 0.3;
        assert!((m.mobility_hat(&f, 0.3).unwrap() - 0.4 * l * l / f.det()).abs() < 1e-14);
    }

    #[test]
    fn chemical_potential_inactive_regularization_is_dz_phi_hat() {
        let m = M::default_instance(2);
        let f = Tensor2::from_rows(&[&[1.1, 0.05], &[-0.02, 0.95]]);
        let r = reg(0.1, 1e3);
        for z in [0.1, 0.5, 0.9] {
            assert_eq!(
                m.chemical_potential(&f, z, &r).unwrap(),
                m.dphi_hat(&f, z).unwrap().1
            );
        }
    }

    #[test]
    fn regularized_point_reduces_to_plain_stress_when_inactive() {
        let m = M::default_instance(2);
        let f = Tensor2::from_rows(&[&[1.1, 0.05], &[-0.02, 0.95]]);
        let p = m.regularized(&f, 0.3, 0.1).unwrap();
        assert_eq!(p.chi, 1.0);
        assert_eq!(p.stress, m.cauchy_stress(&f, 0.3).unwrap());
        assert_eq!(p.phi, m.phi_hat(&f, 0.3).unwrap());
        let dead = m
            .regularized(&Tensor2::diag(&[-0.1, 1.0]), 0.3, 0.1)
            .unwrap();
        assert_eq!(dead.stress, Tensor2::zeros(2));
    }

    #[test]
    fn default_instance_passes_all_checks() {
        let report = M::default_instance(2).check_assumptions(400);
        assert!(report.all_pass(), "{report}");
    }

    #[test]
    fn counterexamples_fail_only_their_check() {
        for (name, model) in M::counterexamples(2) {
            let report = model.check_assumptions(400);
            assert_eq!(report.failed(), vec![name], "{report}");
        }
    }
}

//! Spin-½ algebra, the driven operator basis {H, L, C}, the inertial
//! decomposition matrices B(μ), V(μ) and the free-propagator eigenoperators.

use crate::error::{Result, SteError};
use crate::linalg::{c, Mat2, C64, I, ONE, ZERO};
use nalgebra::Matrix3;

pub type Mat3 = Matrix3<C64>;

/// Spin operators S_i = σ_i / 2 in the fixed z basis.
pub fn sx() -> Mat2 {
    Mat2::new(ZERO, c(0.5), c(0.5), ZERO)
}

pub fn sy() -> Mat2 {
    Mat2::new(ZERO, -I * 0.5, I * 0.5, ZERO)
}

pub fn sz() -> Mat2 {
    Mat2::new(c(0.5), ZERO, ZERO, c(-0.5))
}

/// Spin projection onto a (not necessarily unit) real vector.
pub fn spin_along(v: [f64; 3]) -> Mat2 {
    sx() * c(v[0]) + sy() * c(v[1]) + sz() * c(v[2])
}

/// Expectation values (⟨S_x⟩, ⟨S_y⟩, ⟨S_z⟩) of a state.
pub fn bloch(rho: &Mat2) -> [f64; 3] {
    let ev = |s: Mat2| crate::linalg::trace(&(rho * s)).re;
    [ev(sx()), ev(sy()), ev(sz())]
}

/// The state I/2 + 2 Σ s_i S_i with the given spin expectations.
pub fn from_bloch(s: [f64; 3]) -> Mat2 {
    Mat2::identity() * c(0.5) + spin_along(s) * c(2.0)
}

pub fn generalized_rabi(omega: f64, epsilon: f64) -> Result<f64> {
    if omega == 0.0 && epsilon == 0.0 {
        return Err(SteError::DegenerateFrequency);
    }
    Ok(omega.hypot(epsilon))
}

/// μ = (ω̇ε − ωε̇)/Ω̄³.
pub fn adiabatic_parameter(omega: f64, epsilon: f64, omega_dot: f64, epsilon_dot: f64) -> Result<f64> {
    let r = generalized_rabi(omega, epsilon)?;
    Ok((omega_dot * epsilon - omega * epsilon_dot) / (r * r * r))
}

pub fn kappa(mu: f64) -> f64 {
    mu.hypot(1.0)
}

/// μ, κ and the accumulated phase θ̄ = ∫Ω̄ dt at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialParameters {
    pub mu: f64,
    pub kappa: f64,
    pub theta_bar: f64,
}

impl InertialParameters {
    pub fn new(mu: f64, theta_bar: f64) -> Self {
        Self { mu, kappa: kappa(mu), theta_bar }
    }
}

/// The operator basis H = ωS_z + εS_x, L = εS_z − ωS_x, C = Ω̄S_y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisFrame {
    pub h: Mat2,
    pub l: Mat2,
    pub c: Mat2,
    pub omega: f64,
    pub epsilon: f64,
    pub rabi: f64,
}

impl BasisFrame {
    pub fn new(omega: f64, epsilon: f64) -> Result<Self> {
        let rabi = generalized_rabi(omega, epsilon)?;
        Ok(Self {
            h: sz() * c(omega) + sx() * c(epsilon),
            l: sz() * c(epsilon) - sx() * c(omega),
            c: sy() * c(rabi),
            omega,
            epsilon,
            rabi,
        })
    }

    pub fn ops(&self) -> [Mat2; 3] {
        [self.h, self.l, self.c]
    }

    /// (⟨H⟩, ⟨L⟩, ⟨C⟩) for a state.
    pub fn expectations(&self, rho: &Mat2) -> [f64; 3] {
        self.ops().map(|o| crate::linalg::trace(&(rho * o)).re)
    }

    /// Spin expectations from frame expectations (⟨H⟩, ⟨L⟩, ⟨C⟩).
    pub fn spin_from_expectations(&self, e: [f64; 3]) -> [f64; 3] {
        let r2 = self.rabi * self.rabi;
        [
            (self.epsilon * e[0] - self.omega * e[1]) / r2,
            e[2] / self.rabi,
            (self.omega * e[0] + self.epsilon * e[1]) / r2,
        ]
    }

    /// Unit vector along H in (x, y, z) order.
    pub fn axis(&self) -> [f64; 3] {
        [self.epsilon / self.rabi, 0.0, self.omega / self.rabi]
    }
}

/// B(μ) = i[[0, μ, 0], [−μ, 0, 1], [0, −1, 0]].
pub fn b_matrix(mu: f64) -> Mat3 {
    let m = c(mu);
    Mat3::new(ZERO, m, ZERO, -m, ZERO, ONE, ZERO, -ONE, ZERO) * I
}

/// V(μ) with columns ordered for eigenvalues (0, κ, −κ), and its inverse in
/// closed form.
pub fn v_matrix(mu: f64) -> (Mat3, Mat3) {
    let k = kappa(mu);
    let m = c(mu);
    let ik = I * k;
    let v = Mat3::new(ONE, -m, -m, ZERO, ik, -ik, m, ONE, ONE);
    let k2 = k * k;
    let vinv = Mat3::new(
        c(1.0 / k2),
        ZERO,
        c(mu / k2),
        c(-mu / (2.0 * k2)),
        -I / (2.0 * k),
        c(1.0 / (2.0 * k2)),
        c(-mu / (2.0 * k2)),
        I / (2.0 * k),
        c(1.0 / (2.0 * k2)),
    );
    (v, vinv)
}

pub fn b_eigenvalues(mu: f64) -> [f64; 3] {
    let k = kappa(mu);
    [0.0, k, -k]
}

/// ξ, σ, σ† and the eigenvalues (0, κ, −κ) of the free propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenoperatorSet {
    pub xi: Mat2,
    pub sigma: Mat2,
    pub sigma_dag: Mat2,
    pub eigenvalues: [f64; 3],
}

/// ξ = (H₀ + μC₀)/(κΩ̄₀), σ = (−μH₀ − iκL₀ + C₀)/(2κ²Ω̄₀).
pub fn eigenoperators(mu: f64, frame0: &BasisFrame) -> Result<EigenoperatorSet> {
    if !(frame0.rabi > 0.0) {
        return Err(SteError::DegenerateFrequency);
    }
    let k = kappa(mu);
    let r = frame0.rabi;
    let xi = (frame0.h + frame0.c * c(mu)) / c(k * r);
    let sigma = (frame0.h * c(-mu) - frame0.l * (I * k) + frame0.c) / c(2.0 * k * k * r);
    Ok(EigenoperatorSet { xi, sigma, sigma_dag: sigma.adjoint(), eigenvalues: b_eigenvalues(mu) })
}

impl EigenoperatorSet {
    /// Unit vector n with ξ = n·S.
    pub fn xi_axis(&self) -> [f64; 3] {
        let b = bloch_of_operator(&self.xi);
        [2.0 * b[0], 2.0 * b[1], 2.0 * b[2]]
    }
}

/// Coefficients v with A = v·S for a traceless Hermitian A.
fn bloch_of_operator(a: &Mat2) -> [f64; 3] {
    let ev = |s: Mat2| 2.0 * crate::linalg::trace(&(a * s)).re;
    [ev(sx()), ev(sy()), ev(sz())]
}

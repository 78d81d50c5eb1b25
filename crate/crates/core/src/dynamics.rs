//! Non-adiabatic master equation for the driven two-level system.
//!
//! The interaction-picture state is carried in the generalized canonical form
//! ρ̃ = Z⁻¹ e^{γσ} e^{βξ} e^{γ*σ†}, where (ξ, σ, σ†) are the eigenoperators of
//! the free propagator at the instantaneous adiabatic parameter μ(t). Starting
//! from γ = 0 the state stays in the Gibbs sector and a single ODE for β
//! remains. A direct Liouville-space integration serves as oracle.

use crate::error::{Result, SteError};
use crate::linalg::{c, expm, herm_eig, trace, Mat2, C64, I};
use crate::protocol::ControlProtocol;
use crate::rates::{rates, BathSpec, RatePair};
use crate::su2::{eigenoperators, kappa, spin_along, BasisFrame, EigenoperatorSet};
use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

/// Beyond this |β| the state is numerically pure and β is integrated through y = e^β.
pub const BETA_GUARD: f64 = 50.0;
/// Step-doubling tolerance on the local error estimate.
pub const STEP_TOLERANCE: f64 = 1e-6;

pub type DensityMatrix = Mat2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsParameters {
    pub beta: f64,
    pub gamma: C64,
}

impl GibbsParameters {
    pub fn gibbs(beta: f64) -> Self {
        Self { beta, gamma: C64::new(0.0, 0.0) }
    }
}

/// (β̇, γ̇) of the parameterized master equation, with the γ̇* term in the β
/// equation substituted from the γ equation.
pub fn rhs_full(beta: f64, gamma: C64, mu: f64, r: &RatePair) -> Result<(f64, C64)> {
    if beta.abs() > BETA_GUARD {
        return Err(SteError::Overflow(beta));
    }
    let k2 = kappa(mu).powi(2);
    let k4 = k2 * k2;
    let g2 = gamma.norm_sqr();
    let eb = beta.exp();
    let emb = (-beta).exp();
    let gamma_dot =
        gamma * (r.k_down / (8.0 * k2)) - gamma * (r.k_up * (2.0 * (1.0 + 2.0 * emb) * k2 + g2) / (16.0 * k4));
    let beta_dot = (gamma * eb * gamma_dot.conj()).re / (2.0 * k2)
        - r.k_down * (4.0 * k2 * (eb + 1.0) + g2 * eb) / (16.0 * k4)
        + r.k_up * (g2 + 4.0 * k2 * emb) * (4.0 * (eb + 1.0) * k2 + eb * g2) / (64.0 * k4 * k2);
    Ok((beta_dot, gamma_dot))
}

/// β̇ = (1/4κ²)[k↑(1 + e^{−β}) − k↓(e^β + 1)].
pub fn rhs_gibbs(beta: f64, kappa: f64, r: &RatePair) -> Result<f64> {
    if beta.abs() > BETA_GUARD {
        return Err(SteError::Overflow(beta));
    }
    Ok((r.k_up * (1.0 + (-beta).exp()) - r.k_down * (beta.exp() + 1.0)) / (4.0 * kappa * kappa))
}

/// ẏ for y = e^β: (1/4κ²)[k↑(y + 1) − k↓(y² + y)].
pub fn rhs_gibbs_y(y: f64, kappa: f64, r: &RatePair) -> f64 {
    (r.k_up * (y + 1.0) - r.k_down * (y * y + y)) / (4.0 * kappa * kappa)
}

/// β_IA = −α/T_B, the zero of the Gibbs-sector generator.
pub fn instantaneous_attractor(alpha: f64, t_b: f64) -> f64 {
    -alpha / t_b
}

/// Checks Hermiticity, unit trace and positivity to the given tolerance.
pub fn check_density(rho: &Mat2, eig_tol: f64) -> Result<()> {
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(SteError::InvalidState(format!("trace {tr}")));
    }
    if crate::linalg::fro(&(rho - rho.adjoint())) > 1e-10 {
        return Err(SteError::InvalidState("not Hermitian".into()));
    }
    let (vals, _) = herm_eig(rho);
    if vals[0] < -eig_tol {
        return Err(SteError::InvalidState(format!("min eigenvalue {:e}", vals[0])));
    }
    Ok(())
}

/// ρ̃ = Z⁻¹ e^{γσ} e^{βξ} e^{γ*σ†}.
pub fn state_from_parameters(p: &GibbsParameters, eig: &EigenoperatorSet) -> Result<DensityMatrix> {
    // shift by |β|/2 so that e^{βξ} stays finite for large |β|
    let shift = Mat2::identity() * c(0.5 * p.beta.abs());
    let core = expm(&(eig.xi * c(p.beta) - shift));
    let left = expm(&(eig.sigma * p.gamma));
    let right = expm(&(eig.sigma_dag * p.gamma.conj()));
    let m = left * core * right;
    let z = trace(&m);
    let rho = m / z;
    let rho = (rho + rho.adjoint()) * c(0.5);
    check_density(&rho, 1e-10)?;
    Ok(rho)
}

/// Gibbs state e^{−H/T}/Z.
pub fn gibbs_state(h: &Mat2, temperature: f64) -> Mat2 {
    let (vals, _) = herm_eig(h);
    let e0 = vals[0];
    let m = crate::linalg::herm_apply(h, |x| (-(x - e0) / temperature).exp());
    let z = trace(&m);
    m / z
}

/// Parameterized trajectory sampled at every integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub params: Vec<GibbsParameters>,
    /// Protocol grid stride between successive samples.
    pub stride: usize,
    /// Largest step-doubling error estimate seen.
    pub max_error_estimate: f64,
}

impl Trajectory {
    /// Grid index of sample k.
    pub fn grid_index(&self, k: usize) -> usize {
        k * self.stride
    }

    pub fn beta(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.beta).collect()
    }

    /// ρ̃ at every sample, with ξ, σ taken at the sample's μ.
    pub fn states(&self, protocol: &ControlProtocol) -> Result<Vec<DensityMatrix>> {
        let frame0 = protocol.frame(0);
        self.params
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let eig = eigenoperators(protocol.mu[self.grid_index(k)], &frame0)?;
                state_from_parameters(p, &eig)
            })
            .collect()
    }
}

/// Per-sample (κ, rates) of a protocol, evaluated every half step.
struct Coefficients {
    kappa: Vec<f64>,
    mu: Vec<f64>,
    rates: Vec<RatePair>,
    half: usize,
}

impl Coefficients {
    fn new(protocol: &ControlProtocol, bath: &BathSpec, stride: usize) -> Result<Self> {
        let half = stride / 2;
        let idx: Vec<usize> = (0..protocol.len()).step_by(half).collect();
        Ok(Self {
            kappa: idx.iter().map(|&i| protocol.kappa[i]).collect(),
            mu: idx.iter().map(|&i| protocol.mu[i]).collect(),
            rates: idx.iter().map(|&i| rates(protocol.alpha[i], bath)).collect::<Result<_>>()?,
            half,
        })
    }
}

fn rk4<S, F>(x: S, h: f64, f: F, at: [usize; 3]) -> Result<S>
where
    S: Copy + std::ops::Add<Output = S> + std::ops::Mul<f64, Output = S>,
    F: Fn(S, usize) -> Result<S>,
{
    let k1 = f(x, at[0])?;
    let k2 = f(x + k1 * (0.5 * h), at[1])?;
    let k3 = f(x + k2 * (0.5 * h), at[1])?;
    let k4 = f(x + k3 * h, at[2])?;
    Ok(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct State(f64, C64);

impl std::ops::Add for State {
    type Output = State;
    fn add(self, o: State) -> State {
        State(self.0 + o.0, self.1 + o.1)
    }
}

impl std::ops::Mul<f64> for State {
    type Output = State;
    fn mul(self, s: f64) -> State {
        State(self.0 * s, self.1 * s)
    }
}

/// One step of length h from half-step sample j0 over `span` half-steps.
fn step(x: GibbsParameters, h: f64, co: &Coefficients, j0: usize, span: usize) -> Result<GibbsParameters> {
    let at = [j0, j0 + span / 2, j0 + span];
    if x.gamma == C64::new(0.0, 0.0) {
        if x.beta.abs() > BETA_GUARD {
            let y = rk4(x.beta.exp(), h, |y, j| Ok(rhs_gibbs_y(y, co.kappa[j], &co.rates[j])), at)?;
            if !(y > 0.0 && y.is_finite()) {
                return Err(SteError::Overflow(x.beta));
            }
            return Ok(GibbsParameters::gibbs(y.ln()));
        }
        let b = rk4(x.beta, h, |b, j| rhs_gibbs(b, co.kappa[j], &co.rates[j]), at)?;
        return Ok(GibbsParameters::gibbs(b));
    }
    let s = rk4(
        State(x.beta, x.gamma),
        h,
        |s, j| {
            let (b, g) = rhs_full(s.0, s.1, co.mu[j], &co.rates[j])?;
            Ok(State(b, g))
        },
        at,
    )?;
    Ok(GibbsParameters { beta: s.0, gamma: s.1 })
}

/// Fixed-step RK4 of the parameterized master equation. `dt` is rounded to
/// the nearest even multiple of the grid spacing; every pair of steps is
/// compared against one double step and the estimate must stay below 1e-6.
pub fn integrate(initial: GibbsParameters, protocol: &ControlProtocol, bath: &BathSpec, dt: f64) -> Result<Trajectory> {
    let stride = protocol.stride_for(dt)?;
    let h = stride as f64 * protocol.h;
    let co = Coefficients::new(protocol, bath, stride)?;
    let steps = (protocol.len() - 1) / stride;
    let mut params = Vec::with_capacity(steps + 1);
    let mut t = Vec::with_capacity(steps + 1);
    params.push(initial);
    t.push(0.0);
    let mut max_est: f64 = 0.0;
    let mut x = initial;
    for k in 0..steps {
        let j0 = k * 2;
        x = step(x, h, &co, j0, 2)?;
        params.push(x);
        t.push(protocol.t[(k + 1) * stride]);
        if k % 2 == 1 {
            let start = params[k - 1];
            let big = step(start, 2.0 * h, &co, j0 - 2, 4)?;
            let est = ((big.beta - x.beta).abs() + (big.gamma - x.gamma).norm()) / 15.0;
            max_est = max_est.max(est);
            if est > STEP_TOLERANCE {
                return Err(SteError::StepTooLarge { t: t[k + 1], estimate: est });
            }
        }
    }
    debug_assert_eq!(co.half * 2, stride);
    Ok(Trajectory { t, params, stride, max_error_estimate: max_est })
}

/// Rotation exp(−iθ a·S) carrying the axis n₀ of ξ(0) onto the axis of ξ(μ),
/// with a = n₀ × ŷ and tan θ = μ.
pub fn comoving_rotation(mu: f64, frame0: &BasisFrame) -> Mat2 {
    let n0 = frame0.axis();
    let axis = [-n0[2], 0.0, n0[0]];
    let theta = mu.atan();
    expm(&(spin_along(axis) * (-I * theta)))
}

type Liouvillian = Matrix4<C64>;

fn vec4(m: &Mat2) -> Vector4<C64> {
    Vector4::new(m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)])
}

fn unvec4(v: &Vector4<C64>) -> Mat2 {
    Mat2::new(v[0], v[2], v[1], v[3])
}

/// Dissipator Σ_k r_k (L_kρL_k† − ½{L_k†L_k, ρ}) in column-stacked form,
/// using vec(AρB) = (Bᵀ ⊗ A) vec ρ.
pub fn dissipator(jumps: &[(Mat2, f64)]) -> Liouvillian {
    let id = Mat2::identity();
    let mut l = Liouvillian::zeros();
    for (op, r) in jumps {
        let ld = op.adjoint();
        let ldl = ld * op;
        let term = op.conjugate().kronecker(op) - id.kronecker(&ldl) * c(0.5) - ldl.transpose().kronecker(&id) * c(0.5);
        l += term * c(*r);
    }
    l
}

/// Direct Liouville-space integration of the master equation.
///
/// The state is carried in the frame co-rotating with ξ(μ(t)): ρ̃ = Rρ′R†
/// with R from [`comoving_rotation`], and ρ′ relaxes under the dissipator
/// with jump operators R†σ(μ)R (rate k↓) and R†σ†(μ)R (rate k↑). Returns ρ̃
/// at every integration step.
pub fn superoperator_integrate(
    rho0: &DensityMatrix,
    protocol: &ControlProtocol,
    bath: &BathSpec,
    dt: f64,
) -> Result<Vec<DensityMatrix>> {
    let stride = protocol.stride_for(dt)?;
    let h = stride as f64 * protocol.h;
    let frame0 = protocol.frame(0);
    let half = stride / 2;
    let idx: Vec<usize> = (0..protocol.len()).step_by(half).collect();
    let gens: Vec<Liouvillian> = idx
        .iter()
        .map(|&i| {
            let mu = protocol.mu[i];
            let r = comoving_rotation(mu, &frame0);
            let e = eigenoperators(mu, &frame0)?;
            let rates = rates(protocol.alpha[i], bath)?;
            let s = r.adjoint() * e.sigma * r;
            Ok(dissipator(&[(s, rates.k_down), (s.adjoint(), rates.k_up)]))
        })
        .collect::<Result<_>>()?;
    let r0 = comoving_rotation(protocol.mu[0], &frame0);
    let mut v = vec4(&(r0.adjoint() * rho0 * r0));
    let steps = (protocol.len() - 1) / stride;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*rho0);
    for k in 0..steps {
        let j = 2 * k;
        let k1 = gens[j] * v;
        let k2 = gens[j + 1] * (v + k1 * c(0.5 * h));
        let k3 = gens[j + 1] * (v + k2 * c(0.5 * h));
        let k4 = gens[j + 2] * (v + k3 * c(h));
        v += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
        let i = (k + 1) * stride;
        let r = comoving_rotation(protocol.mu[i], &frame0);
        let rho = r * unvec4(&v) * r.adjoint();
        let (vals, _) = herm_eig(&crate::linalg::hermitian_part(&rho));
        if vals[0] < -1e-6 {
            return Err(SteError::PositivityLoss { t: protocol.t[i], min_eig: vals[0] });
        }
        out.push(rho);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro;
    use crate::propagation::trace_distance;
    use crate::su2::sz;
    use proptest::prelude::*;

    fn rp(up: f64, down: f64) -> RatePair {
        RatePair { k_up: up, k_down: down }
    }

    #[test]
    fn gamma_zero_reduces_to_gibbs_equation() {
        let r = rp(0.13, 0.41);
        for (beta, mu) in [(-1.0, 0.0), (-2.4, 0.7), (0.5, -1.3)] {
            let (bd, gd) = rhs_full(beta, C64::new(0.0, 0.0), mu, &r).unwrap();
            assert_eq!(gd, C64::new(0.0, 0.0));
            let g = rhs_gibbs(beta, kappa(mu), &r).unwrap();
            assert!((bd - g).abs() < 1e-15 * (1.0 + g.abs()));
        }
    }

    #[test]
    fn fixed_point_and_static_limits() {
        let bath = BathSpec::new(5.0, 0.04).unwrap();
        let r = rates(5.0, &bath).unwrap();
        let (bd, gd) = rhs_full(instantaneous_attractor(5.0, 5.0), C64::new(0.0, 0.0), 0.0, &r).unwrap();
        assert!(bd.abs() < 1e-15 && gd.norm() == 0.0);
        let (bd, gd) = rhs_full(-0.7, C64::new(0.2, -0.3), 0.4, &RatePair::ZERO).unwrap();
        assert_eq!((bd, gd), (0.0, C64::new(0.0, 0.0)));
        assert_eq!(instantaneous_attractor(5.0, 5.0), -1.0);
    }

    #[test]
    fn gibbs_equation_limits() {
        // heating away from purity dominates near the ground state
        let r = rp(0.01, 0.2);
        let bd = rhs_gibbs(-40.0, 1.0, &r).unwrap();
        assert!(bd > 1e14);
        assert!((bd - r.k_up * 40f64.exp() / 4.0).abs() < 1e-6 * bd);
        let bd = rhs_gibbs(0.3, 1.0, &rp(0.0, 0.2)).unwrap();
        assert_eq!(bd, -0.2 * (0.3f64.exp() + 1.0) / 4.0);
        assert!(matches!(rhs_gibbs(-51.0, 1.0, &r), Err(SteError::Overflow(_))));
    }

    /// Lindblad generator in the basis diagonalizing ξ(μ); independent of the
    /// printed (β, γ) equations.
    fn lindblad_rhs(rho: &Mat2, eig: &EigenoperatorSet, r: &RatePair) -> Mat2 {
        let d = |l: &Mat2, rate: f64| {
            let ld = l.adjoint();
            (l * rho * ld - (ld * l * rho + rho * ld * l) * c(0.5)) * c(rate)
        };
        d(&eig.sigma, r.k_down) + d(&eig.sigma_dag, r.k_up)
    }

    proptest! {
        #[test]
        fn parameterized_equations_match_lindblad(
            beta in -3.0f64..1.0, gr in -0.5f64..0.5, gi in -0.5f64..0.5, mu in -2.0f64..2.0,
            up in 0.01f64..0.5, down in 0.01f64..0.5,
        ) {
            // d/dt of the parameterized state must equal the generator applied to it
            let frame0 = BasisFrame::new(4.0, 1.5).unwrap();
            let eig = eigenoperators(mu, &frame0).unwrap();
            let r = rp(up, down);
            let p = GibbsParameters { beta, gamma: C64::new(gr, gi) };
            let (bd, gd) = rhs_full(beta, p.gamma, mu, &r).unwrap();
            let h = 1e-5;
            let plus = state_from_parameters(&GibbsParameters { beta: beta + h * bd, gamma: p.gamma + gd * h }, &eig).unwrap();
            let minus = state_from_parameters(&GibbsParameters { beta: beta - h * bd, gamma: p.gamma - gd * h }, &eig).unwrap();
            let lhs = (plus - minus) / c(2.0 * h);
            let rho = state_from_parameters(&p, &eig).unwrap();
            let rhs = lindblad_rhs(&rho, &eig, &r);
            prop_assert!(fro(&(lhs - rhs)) < 1e-7 * (1.0 + fro(&rhs)));
        }

        #[test]
        fn gamma_sector_decouples(beta in -10.0f64..10.0, mu in -5.0f64..5.0) {
            let (_, gd) = rhs_full(beta, C64::new(0.0, 0.0), mu, &rp(0.2, 0.3)).unwrap();
            prop_assert_eq!(gd, C64::new(0.0, 0.0));
        }

        #[test]
        fn attractor_is_root(alpha in 0.1f64..40.0, tb in 0.5f64..20.0, mu in -3.0f64..3.0) {
            let bath = BathSpec::new(tb, 0.04).unwrap();
            let b = instantaneous_attractor(alpha, tb);
            prop_assume!(b.abs() <= BETA_GUARD);
            let bd = rhs_gibbs(b, kappa(mu), &rates(alpha, &bath).unwrap()).unwrap();
            prop_assert!(bd.abs() < 1e-13);
        }

        #[test]
        fn monotone_approach(beta in -20.0f64..5.0, alpha in 0.5f64..30.0, tb in 0.5f64..20.0) {
            let bath = BathSpec::new(tb, 0.1).unwrap();
            let bia = instantaneous_attractor(alpha, tb);
            prop_assume!((beta - bia).abs() > 1e-6);
            let bd = rhs_gibbs(beta, 1.3, &rates(alpha, &bath).unwrap()).unwrap();
            prop_assert_eq!(bd > 0.0, bia > beta);
        }

        #[test]
        fn parameterized_states_are_valid(beta in -30.0f64..30.0, gr in -2.0f64..2.0, gi in -2.0f64..2.0, mu in -5.0f64..5.0) {
            let frame0 = BasisFrame::new(-2.0, 3.0).unwrap();
            let eig = eigenoperators(mu, &frame0).unwrap();
            let rho = state_from_parameters(&GibbsParameters { beta, gamma: C64::new(gr, gi) }, &eig).unwrap();
            prop_assert!((trace(&rho).re - 1.0).abs() < 1e-12);
            prop_assert!(fro(&(rho - rho.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn state_examples() {
        let frame0 = BasisFrame::new(5.0, 0.0).unwrap();
        let eig = eigenoperators(0.0, &frame0).unwrap();
        let rho = state_from_parameters(&GibbsParameters::gibbs(0.0), &eig).unwrap();
        assert!(fro(&(rho - Mat2::identity() * c(0.5))) < 1e-15);
        // γ = 0, μ = 0: thermal state of H(0) at T = −Ω̄₀/β
        let rho = state_from_parameters(&GibbsParameters::gibbs(-1.0), &eig).unwrap();
        let th = gibbs_state(&(sz() * c(5.0)), 5.0);
        assert!(fro(&(rho - th)) < 1e-15);
        assert!(rho[(0, 1)].norm() == 0.0);
    }

    #[test]
    fn static_relaxation_matches_rate_equation() {
        // populations obey ṗ↑ = −(k↑ + k↓)/4 (p↑ − p∞) at μ = 0
        let bath = BathSpec::default();
        let p = ControlProtocol::constant(5.0, 40.0, 80001).unwrap();
        let traj = integrate(GibbsParameters::gibbs(-3.0), &p, &bath, 1e-3).unwrap();
        let r = rates(5.0, &bath).unwrap();
        let pinf = r.k_up / (r.k_up + r.k_down);
        let p0 = 1.0 / (1.0 + 3f64.exp());
        for (k, par) in traj.params.iter().enumerate().step_by(1000) {
            let t = traj.t[k];
            let exact = pinf + (p0 - pinf) * (-(r.k_up + r.k_down) / 4.0 * t).exp();
            let got = 1.0 / (1.0 + (-par.beta).exp());
            assert!((got - exact).abs() < 1e-10, "t={t}");
        }
        let last = traj.params.last().unwrap().beta;
        assert!((last + 1.0).abs() < 0.02, "beta(tf) = {last}");
    }

    #[test]
    fn gamma_stays_exactly_zero() {
        let n = 4001;
        let h = 2.0 / (n - 1) as f64;
        let phi_dot: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
        let phi: Vec<f64> = (0..n).map(|i| 1.0 - (i as f64 * h).cos()).collect();
        let p = ControlProtocol::from_rabi_phase(h, vec![6.0; n], phi, phi_dot).unwrap();
        let traj = integrate(GibbsParameters::gibbs(-1.2), &p, &BathSpec::default(), 1e-3).unwrap();
        assert!(traj.params.iter().all(|q| q.gamma == C64::new(0.0, 0.0)));
    }

    #[test]
    fn step_halving_self_convergence() {
        let n = 8001;
        let tf = 4.0;
        let h = tf / (n - 1) as f64;
        let ts: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let rabi = ts.iter().map(|t| 6.0 + 2.0 * t.sin()).collect();
        let phi = ts.iter().map(|t| 0.3 * t * t).collect();
        let phi_dot = ts.iter().map(|t| 0.6 * t).collect();
        let p = ControlProtocol::from_rabi_phase(h, rabi, phi, phi_dot).unwrap();
        let bath = BathSpec::new(5.0, 0.5).unwrap();
        let init = GibbsParameters { beta: -2.0, gamma: C64::new(0.3, -0.1) };
        let a = integrate(init, &p, &bath, 1e-3).unwrap();
        let b = integrate(init, &p, &bath, 2e-3).unwrap();
        let da = a.params.last().unwrap().beta - b.params.last().unwrap().beta;
        assert!(da.abs() < 1e-9, "{da:e}");
        let g = integrate(GibbsParameters::gibbs(-2.0), &p, &bath, 1e-3).unwrap();
        let g2 = integrate(GibbsParameters::gibbs(-2.0), &p, &bath, 2e-3).unwrap();
        assert!((g.params.last().unwrap().beta - g2.params.last().unwrap().beta).abs() < 1e-9);
    }

    #[test]
    fn y_form_handles_nearly_pure_states() {
        let bath = BathSpec::new(0.05, 0.1).unwrap();
        let p = ControlProtocol::constant(5.0, 2.0, 2001).unwrap();
        let traj = integrate(GibbsParameters::gibbs(-60.0), &p, &bath, 1e-3).unwrap();
        let b = traj.params.last().unwrap().beta;
        assert!(b.is_finite() && b < -50.0);
    }

    #[test]
    fn superoperator_zero_rates_and_static_limit() {
        let frame = BasisFrame::new(5.0, 0.0).unwrap();
        let rho0 = gibbs_state(&frame.h, 2.0);
        let p = ControlProtocol::constant(5.0, 60.0, 60001).unwrap();
        let out = superoperator_integrate(&rho0, &p, &BathSpec::new(5.0, 1e-300).unwrap(), 2e-3).unwrap();
        assert!(fro(&(out.last().unwrap() - rho0)) < 1e-14);
        let out = superoperator_integrate(&rho0, &p, &BathSpec::new(5.0, 0.2).unwrap(), 2e-3).unwrap();
        let th = gibbs_state(&frame.h, 5.0);
        assert!(trace_distance(out.last().unwrap(), &th) < 1e-6);
        for rho in &out {
            assert!((trace(rho).re - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn superoperator_matches_parameters_with_coherence() {
        // constant μ: no frame rotation, both descriptions evolve the same generator
        let n = 6001;
        let tf = 6.0;
        let h = tf / (n - 1) as f64;
        let mu = 0.6;
        let rabi = 5.0;
        let phi = (0..n).map(|i| -mu * rabi * i as f64 * h).collect();
        let p = ControlProtocol::from_rabi_phase(h, vec![rabi; n], phi, vec![-mu * rabi; n]).unwrap();
        let bath = BathSpec::new(5.0, 0.3).unwrap();
        let init = GibbsParameters { beta: -1.5, gamma: C64::new(0.4, 0.2) };
        let traj = integrate(init, &p, &bath, 1e-3).unwrap();
        let states = traj.states(&p).unwrap();
        let oracle = superoperator_integrate(&states[0], &p, &bath, 1e-3).unwrap();
        for (a, b) in states.iter().zip(&oracle) {
            assert!(trace_distance(a, b) < 1e-9);
        }
    }
}

//! Thermodynamic bookkeeping along a trajectory.

use crate::dynamics::{instantaneous_attractor, state_from_parameters, GibbsParameters, Trajectory};
use crate::error::{Result, SteError};
use crate::linalg::{c, herm_apply, herm_eig, trace, Mat2};
use crate::propagation::{inertial_series, schrodinger_state};
use crate::protocol::ControlProtocol;
use crate::rates::{rates, BathSpec, RatePair};
use crate::su2::{eigenoperators, EigenoperatorSet};
use serde::{Deserialize, Serialize};

/// Eigenvalue floor applied before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-14;

/// ⟨∂H/∂t⟩.
pub fn power(rho: &Mat2, dh_dt: &Mat2) -> f64 {
    trace(&(rho * dh_dt)).re
}

/// tr(H dρ/dt).
pub fn heat_current(rho_dot: &Mat2, h: &Mat2) -> f64 {
    trace(&(h * rho_dot)).re
}

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|x| **x > 0.0).map(|x| -x * x.ln()).sum()
}

/// −tr(ρ ln ρ).
pub fn von_neumann_entropy(rho: &Mat2) -> f64 {
    let (vals, _) = herm_eig(&crate::linalg::hermitian_part(rho));
    shannon(&[vals[0].max(0.0), vals[1].max(0.0)])
}

/// Shannon entropy of the populations in the eigenbasis of H.
pub fn energy_entropy(rho: &Mat2, h: &Mat2) -> Result<f64> {
    let (vals, v) = herm_eig(h);
    let gap = vals[1] - vals[0];
    if gap < 1e-12 {
        return Err(SteError::DegenerateHamiltonian(gap));
    }
    let pops = v.adjoint() * rho * v;
    Ok(shannon(&[pops[(0, 0)].re.max(0.0), pops[(1, 1)].re.max(0.0)]))
}

/// Spohn entropy-production rate and whether the logarithm needed regularizing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyProduction {
    pub rate: f64,
    pub regularized: bool,
}

/// Σ̇ = −tr[(dρ̃/dt)(ln ρ̃ − ln ρ̃_IA)] with dρ̃/dt the dissipative generator
/// applied to ρ̃.
pub fn entropy_production_rate(rho_tilde: &Mat2, attractor: &Mat2, generator_rhs: &Mat2) -> EntropyProduction {
    let (v1, _) = herm_eig(rho_tilde);
    let (v2, _) = herm_eig(attractor);
    let regularized = v1[0] < LOG_FLOOR || v2[0] < LOG_FLOOR;
    let ln = |m: &Mat2| herm_apply(m, |x| x.max(LOG_FLOOR).ln());
    let diff = ln(rho_tilde) - ln(attractor);
    EntropyProduction { rate: -trace(&(generator_rhs * diff)).re, regularized }
}

/// Dissipator with jump operators σ (rate k↓) and σ† (rate k↑) applied to ρ̃.
pub fn dissipator_rhs(rho: &Mat2, eig: &EigenoperatorSet, r: &RatePair) -> Mat2 {
    let d = |l: &Mat2, rate: f64| {
        let ld = l.adjoint();
        let ldl = ld * l;
        (l * rho * ld - (ldl * rho + rho * ldl) * c(0.5)) * c(rate)
    };
    d(&eig.sigma, r.k_down) + d(&eig.sigma_dag, r.k_up)
}

/// Reading of the speed-limit summand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedLimitForm {
    /// ‖r_k F_k‖² = r_k²‖F_k‖².
    #[default]
    Squared,
    /// r_k‖F_k‖².
    Linear,
}

/// 4∫ Σ_k ‖r_k F_k‖²_sp dt over the protocol grid, with F = σ, σ† and
/// r = k↓, k↑.
pub fn speed_limit_bound(protocol: &ControlProtocol, rate_series: &[RatePair], form: SpeedLimitForm) -> Result<f64> {
    if rate_series.len() != protocol.len() {
        return Err(SteError::InvalidGrid("rate series length differs from protocol".into()));
    }
    let frame0 = protocol.frame(0);
    let integrand = protocol
        .mu
        .iter()
        .zip(rate_series)
        .map(|(mu, r)| {
            let e = eigenoperators(*mu, &frame0)?;
            let nd = crate::linalg::spectral_norm(&e.sigma).powi(2);
            let nu = crate::linalg::spectral_norm(&e.sigma_dag).powi(2);
            Ok(4.0
                * match form {
                    SpeedLimitForm::Squared => r.k_down * r.k_down * nd + r.k_up * r.k_up * nu,
                    SpeedLimitForm::Linear => r.k_down * nd + r.k_up * nu,
                })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(crate::propagation::cumulative_integral(&integrand, protocol.h).last().copied().unwrap_or(0.0))
}

/// T_eff = −Ω̄/β.
pub fn effective_temperature(beta: f64, rabi: f64) -> Result<f64> {
    if !(beta < 0.0) {
        return Err(SteError::NonThermalState(beta));
    }
    Ok(-rabi / beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Expansion,
    Compression,
}

impl Direction {
    /// Expansion lowers the level splitting, compression raises it.
    pub fn of(rabi_i: f64, rabi_f: f64) -> Self {
        if rabi_f < rabi_i {
            Direction::Expansion
        } else {
            Direction::Compression
        }
    }
}

/// η = W_adi/W for expansion, W/W_adi for compression.
pub fn work_efficiency(w: f64, w_adi: f64, direction: Direction) -> Result<f64> {
    let (num, den) = match direction {
        Direction::Expansion => (w_adi, w),
        Direction::Compression => (w, w_adi),
    };
    if den == 0.0 {
        return Err(SteError::DivisionByZero("work efficiency"));
    }
    Ok(num / den)
}

/// Thermodynamic time series on the integration samples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ThermoLedger {
    pub t: Vec<f64>,
    pub energy: Vec<f64>,
    pub power: Vec<f64>,
    pub work: Vec<f64>,
    pub heat_current: Vec<f64>,
    pub heat: Vec<f64>,
    pub s_vn: Vec<f64>,
    pub s_e: Vec<f64>,
    pub delta_s_bath: Vec<f64>,
    pub delta_s_universe: Vec<f64>,
    pub sigma_dot: Vec<f64>,
    pub purity: Vec<f64>,
    pub t_eff: Vec<f64>,
    /// Schrödinger-picture states.
    #[serde(skip)]
    pub states: Vec<Mat2>,
    /// Interaction-picture states.
    #[serde(skip)]
    pub states_tilde: Vec<Mat2>,
    /// Samples where the entropy-production logarithm hit the eigenvalue floor.
    pub regularized_samples: usize,
}

impl ThermoLedger {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Largest |ΔE − W − Q| over the samples.
    pub fn first_law_residual(&self) -> f64 {
        let e0 = self.energy[0];
        (0..self.len()).map(|k| (self.energy[k] - e0 - self.work[k] - self.heat[k]).abs()).fold(0.0, f64::max)
    }

    /// |ln(P_f/P_i)|.
    pub fn ln_purity_ratio(&self) -> f64 {
        (self.purity[self.len() - 1] / self.purity[0]).ln().abs()
    }
}

/// Build the ledger from a parameterized trajectory.
///
/// Schrödinger-picture states come from the inertial Heisenberg map. Work and
/// heat increments are ΔW = tr(ΔH·ρ̄) and ΔQ = tr(H̄·Δρ) over each step, which
/// close the first law exactly; 𝒫 and 𝒥 are the matching rates from centered
/// differences.
pub fn build_ledger(protocol: &ControlProtocol, traj: &Trajectory, bath: &BathSpec) -> Result<ThermoLedger> {
    let n = traj.params.len();
    let stride = traj.stride;
    let frame0 = protocol.frame(0);
    let maps = inertial_series(protocol, stride);
    let domega = protocol.derivative(&protocol.omega);
    let deps = protocol.derivative(&protocol.epsilon);

    let mut lg = ThermoLedger { t: traj.t.clone(), ..Default::default() };
    let mut hs = Vec::with_capacity(n);
    for (k, p) in traj.params.iter().enumerate() {
        let i = k * stride;
        let mu = protocol.mu[i];
        let eig = eigenoperators(mu, &frame0)?;
        let rho_t = state_from_parameters(p, &eig)?;
        let frame = protocol.frame(i);
        let rho = schrodinger_state(&rho_t, &frame0, &frame, &maps[k]);
        let dh = crate::su2::sz() * c(domega[i]) + crate::su2::sx() * c(deps[i]);
        let r = rates(protocol.alpha[i], bath)?;
        let attractor = state_from_parameters(
            &GibbsParameters::gibbs(instantaneous_attractor(protocol.alpha[i], bath.temperature)),
            &eig,
        )?;
        let ep = entropy_production_rate(&rho_t, &attractor, &dissipator_rhs(&rho_t, &eig, &r));
        lg.regularized_samples += ep.regularized as usize;
        lg.sigma_dot.push(ep.rate);
        lg.energy.push(trace(&(rho * frame.h)).re);
        lg.power.push(power(&rho, &dh));
        lg.s_vn.push(von_neumann_entropy(&rho));
        lg.s_e.push(energy_entropy(&rho, &frame.h)?);
        lg.purity.push(trace(&(rho * rho)).re);
        lg.t_eff.push(effective_temperature(p.beta, protocol.rabi[i]).unwrap_or(f64::NAN));
        lg.states.push(rho);
        lg.states_tilde.push(rho_t);
        hs.push(frame.h);
    }

    let dt = stride as f64 * protocol.h;
    let mut w = 0.0;
    let mut q = 0.0;
    lg.work.push(0.0);
    lg.heat.push(0.0);
    for k in 0..n.saturating_sub(1) {
        let dh = hs[k + 1] - hs[k];
        let hbar = (hs[k + 1] + hs[k]) * c(0.5);
        let rbar = (lg.states[k + 1] + lg.states[k]) * c(0.5);
        let drho = lg.states[k + 1] - lg.states[k];
        w += trace(&(dh * rbar)).re;
        q += trace(&(hbar * drho)).re;
        lg.work.push(w);
        lg.heat.push(q);
    }
    for (k, h) in hs.iter().enumerate() {
        let rho_dot = if n < 2 {
            Mat2::zeros()
        } else if k == 0 {
            (lg.states[1] - lg.states[0]) / c(dt)
        } else if k == n - 1 {
            (lg.states[k] - lg.states[k - 1]) / c(dt)
        } else {
            (lg.states[k + 1] - lg.states[k - 1]) / c(2.0 * dt)
        };
        lg.heat_current.push(heat_current(&rho_dot, h));
        let dsb = -lg.heat[k] / bath.temperature;
        lg.delta_s_bath.push(dsb);
        lg.delta_s_universe.push(lg.s_vn[k] - lg.s_vn[0] + dsb);
    }
    Ok(lg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{gibbs_state, integrate};
    use crate::linalg::{C64, ZERO};
    use crate::su2::{sx, sz, BasisFrame};

    fn diag(a: f64, b: f64) -> Mat2 {
        Mat2::new(c(a), ZERO, ZERO, c(b))
    }

    #[test]
    fn power_examples() {
        let dh = sz() * c(2.0) + sx() * c(-1.0);
        assert_eq!(power(&diag(0.5, 0.5), &dh), 0.0);
        assert_eq!(power(&diag(0.8, 0.2), &Mat2::zeros()), 0.0);
    }

    #[test]
    fn entropy_examples() {
        assert!((von_neumann_entropy(&diag(0.5, 0.5)) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(von_neumann_entropy(&diag(1.0, 0.0)), 0.0);
        let expect = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        assert!((von_neumann_entropy(&diag(0.9, 0.1)) - expect).abs() < 1e-15);
        assert!((expect - 0.3251).abs() < 1e-4);
        let h = sz() * c(3.0);
        let rho = diag(0.7, 0.3);
        assert!((energy_entropy(&rho, &h).unwrap() - von_neumann_entropy(&rho)).abs() < 1e-15);
        assert_eq!(energy_entropy(&diag(0.0, 1.0), &h).unwrap(), 0.0);
        let plus = Mat2::new(c(0.5), c(0.5), c(0.5), c(0.5));
        assert!((energy_entropy(&plus, &h).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(von_neumann_entropy(&plus).abs() < 1e-15);
        assert!(matches!(energy_entropy(&plus, &Mat2::identity()), Err(SteError::DegenerateHamiltonian(_))));
    }

    #[test]
    fn entropy_production_vanishes_at_attractor() {
        let frame = BasisFrame::new(5.0, 0.0).unwrap();
        let eig = eigenoperators(0.3, &frame).unwrap();
        let r = rates(5.0 * crate::su2::kappa(0.3), &BathSpec::default()).unwrap();
        let b = instantaneous_attractor(5.0 * crate::su2::kappa(0.3), 5.0);
        let att = state_from_parameters(&GibbsParameters::gibbs(b), &eig).unwrap();
        let ep = entropy_production_rate(&att, &att, &dissipator_rhs(&att, &eig, &r));
        assert!(ep.rate.abs() < 1e-15);
        assert!(!ep.regularized);
        // off the attractor, with coherence, still nonnegative
        let rho = state_from_parameters(&GibbsParameters { beta: -0.3, gamma: C64::new(0.4, -0.2) }, &eig).unwrap();
        assert!(entropy_production_rate(&rho, &att, &dissipator_rhs(&rho, &eig, &r)).rate > 0.0);
    }

    #[test]
    fn effective_temperature_examples() {
        assert_eq!(effective_temperature(-1.0, 5.0).unwrap(), 5.0);
        assert!(matches!(effective_temperature(0.0, 5.0), Err(SteError::NonThermalState(_))));
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(work_efficiency(2.0, 2.0, Direction::Expansion).unwrap(), 1.0);
        assert_eq!(work_efficiency(4.0, 2.0, Direction::Expansion).unwrap(), 0.5);
        assert_eq!(work_efficiency(1.0, 2.0, Direction::Compression).unwrap(), 0.5);
        assert!(work_efficiency(0.0, 2.0, Direction::Expansion).is_err());
        assert_eq!(Direction::of(12.0, 5.0), Direction::Expansion);
    }

    #[test]
    fn speed_limit_zero_rates() {
        let p = ControlProtocol::constant(5.0, 2.0, 201).unwrap();
        let b = speed_limit_bound(&p, &vec![RatePair::ZERO; 201], SpeedLimitForm::Squared).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn static_relaxation_ledger() {
        let bath = BathSpec::default();
        let p = ControlProtocol::constant(5.0, 10.0, 10001).unwrap();
        // hot start: heat flows out
        let traj = integrate(GibbsParameters::gibbs(-0.5), &p, &bath, 2e-3).unwrap();
        let lg = build_ledger(&p, &traj, &bath).unwrap();
        assert!(lg.heat.last().unwrap() < &0.0);
        assert!(lg.power.iter().all(|x| x.abs() < 1e-12));
        assert!(lg.work.iter().all(|x| x.abs() < 1e-12));
        assert!(lg.first_law_residual() < 1e-12);
        assert!(lg.sigma_dot.iter().all(|s| *s >= -1e-9));
        assert!(*lg.delta_s_universe.last().unwrap() >= 0.0);
        // equilibrium start: nothing moves, no entropy production
        let traj = integrate(GibbsParameters::gibbs(-1.0), &p, &bath, 2e-3).unwrap();
        let lg = build_ledger(&p, &traj, &bath).unwrap();
        assert!(lg.sigma_dot.iter().all(|s| s.abs() < 1e-14));
        let th = gibbs_state(&(sz() * c(5.0)), 5.0);
        assert!(crate::linalg::fro(&(lg.states[0] - th)) < 1e-15);
    }

    #[test]
    fn isolated_system_has_no_heat() {
        let bath = BathSpec::new(5.0, 1e-300).unwrap();
        let n = 4001;
        let h = 4.0 / (n - 1) as f64;
        let rabi = (0..n).map(|i| 5.0 + i as f64 * h).collect();
        let p = ControlProtocol::from_rabi_phase(h, rabi, vec![0.0; n], vec![0.0; n]).unwrap();
        let traj = integrate(GibbsParameters::gibbs(-1.0), &p, &bath, 2e-3).unwrap();
        let lg = build_ledger(&p, &traj, &bath).unwrap();
        assert!(lg.heat_current.iter().all(|j| j.abs() < 1e-12));
        assert!(lg.heat.last().unwrap().abs() < 1e-12);
    }
}

//! Kinetic coefficients of an Ohmic boson bath.

use crate::error::{Result, SteError};
use crate::su2::kappa;
use serde::{Deserialize, Serialize};

/// Default rate prefactor G (a.u.).
pub const DEFAULT_PREFACTOR: f64 = 0.1;
/// Default bath temperature T_B (a.u.).
pub const DEFAULT_BATH_TEMPERATURE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    pub temperature: f64,
    pub prefactor: f64,
}

impl Default for BathSpec {
    fn default() -> Self {
        Self { temperature: DEFAULT_BATH_TEMPERATURE, prefactor: DEFAULT_PREFACTOR }
    }
}

impl BathSpec {
    pub fn new(temperature: f64, prefactor: f64) -> Result<Self> {
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(SteError::Config(format!("bath temperature must be positive, got {temperature}")));
        }
        if !(prefactor > 0.0 && prefactor.is_finite()) {
            return Err(SteError::Config(format!("rate prefactor must be positive, got {prefactor}")));
        }
        Ok(Self { temperature, prefactor })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub k_up: f64,
    pub k_down: f64,
}

impl RatePair {
    pub const ZERO: RatePair = RatePair { k_up: 0.0, k_down: 0.0 };
}

/// N = 1/(e^{α/T} − 1).
pub fn bose_occupation(alpha: f64, t: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(SteError::NonPositiveFrequency(alpha));
    }
    Ok(1.0 / (alpha / t).exp_m1())
}

/// k↑ = GαN, k↓ = Gα(N + 1).
///
/// Both are formed from e^{-α/T} so that k↑/k↓ reproduces the Boltzmann
/// factor to the last bit: k↓ = Gα/(1 − x), k↑ = x·k↓ with x = e^{-α/T}.
pub fn rates(alpha: f64, bath: &BathSpec) -> Result<RatePair> {
    if !(alpha > 0.0) {
        return Err(SteError::NonPositiveFrequency(alpha));
    }
    let x = (-alpha / bath.temperature).exp();
    let k_down = bath.prefactor * alpha / -(-alpha / bath.temperature).exp_m1();
    Ok(RatePair { k_up: x * k_down, k_down })
}

/// α = κ(μ)·Ω̄.
pub fn effective_frequency(mu: f64, rabi: f64) -> f64 {
    kappa(mu) * rabi
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn occupation_examples() {
        assert!(bose_occupation(1000.0, 1.0).unwrap() < 1e-300);
        assert!((bose_occupation(3.0 * 2f64.ln(), 3.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(bose_occupation(0.0, 1.0), Err(SteError::NonPositiveFrequency(0.0)));
        assert!(rates(-1.0, &BathSpec::default()).is_err());
    }

    #[test]
    fn rate_difference_is_g_alpha() {
        let r = rates(5.0, &BathSpec::new(5.0, 0.04).unwrap()).unwrap();
        assert!((r.k_down - r.k_up - 0.2).abs() < 1e-15);
    }

    #[test]
    fn vacuum_limit() {
        let r = rates(5.0, &BathSpec::new(1e-3, 0.04).unwrap()).unwrap();
        assert_eq!(r.k_up, 0.0);
        assert!((r.k_down - 0.2).abs() < 1e-15);
    }

    #[test]
    fn effective_frequency_examples() {
        assert_eq!(effective_frequency(0.0, 5.0), 5.0);
        assert!((effective_frequency(1.0, 5.0) - 5.0 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rates_increase_with_alpha() {
        let bath = BathSpec::default();
        let mut prev = rates(0.01, &bath).unwrap();
        for k in 2..4000 {
            let r = rates(0.01 * k as f64, &bath).unwrap();
            assert!(r.k_down > prev.k_down);
            // k↑ = Gα/(e^{α/T} − 1) decreases once α exceeds the thermal scale
            prev = r;
        }
    }

    proptest! {
        #[test]
        fn occupation_identity(a in 0.01f64..50.0, t in 0.1f64..50.0) {
            let n = bose_occupation(a, t).unwrap();
            prop_assert!(((n + 1.0) - (a / t).exp() * n).abs() < 1e-11 * (n + 1.0));
        }

        #[test]
        fn detailed_balance(a in 0.01f64..100.0, t in 0.1f64..100.0) {
            let r = rates(a, &BathSpec::new(t, 0.04).unwrap()).unwrap();
            let x = (-a / t).exp();
            prop_assert!((r.k_up / r.k_down - x).abs() <= 1e-14 * x.max(f64::MIN_POSITIVE));
            let n = bose_occupation(a, t).unwrap();
            prop_assert!((r.k_up - 0.04 * a * n).abs() < 1e-12 * (1.0 + r.k_up));
        }

        #[test]
        fn skewed_detailed_balance(mu in 0.01f64..5.0, rabi in 0.5f64..20.0) {
            let bath = BathSpec::default();
            let r = rates(effective_frequency(mu, rabi), &bath).unwrap();
            prop_assert!(r.k_up / r.k_down < (-rabi / bath.temperature).exp());
        }
    }
}

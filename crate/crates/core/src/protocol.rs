//! Time-sampled driving protocol on a uniform grid.

use crate::error::{Result, SteError};
use crate::su2::{kappa, BasisFrame};
use serde::{Deserialize, Serialize};

/// Root-finding diagnostics gathered during synthesis.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SynthesisDiagnostics {
    /// Grid points where the scan saw more than one sign change.
    pub multiple_root_points: usize,
    /// Largest number of sign changes seen at one grid point.
    pub max_sign_changes: usize,
}

/// Driving fields ω(t), ε(t) with the derived Ω̄, Φ, Φ̇, μ, κ, α on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlProtocol {
    pub h: f64,
    pub t: Vec<f64>,
    pub omega: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub rabi: Vec<f64>,
    pub phi: Vec<f64>,
    pub phi_dot: Vec<f64>,
    pub mu: Vec<f64>,
    pub kappa: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Fields (ω, ε) in force before t = 0, when they differ from the first sample.
    pub initial_fields: Option<(f64, f64)>,
    pub diagnostics: SynthesisDiagnostics,
}

impl ControlProtocol {
    /// Build from Ω̄(t), Φ(t), Φ̇(t) samples: ω = Ω̄cosΦ, ε = Ω̄sinΦ,
    /// μ = −Φ̇/Ω̄, κ = √(1+μ²), α = κΩ̄.
    pub fn from_rabi_phase(h: f64, rabi: Vec<f64>, phi: Vec<f64>, phi_dot: Vec<f64>) -> Result<Self> {
        let n = rabi.len();
        if n < 3 || phi.len() != n || phi_dot.len() != n {
            return Err(SteError::InvalidGrid(format!(
                "need at least 3 matching samples, got {} / {} / {}",
                n,
                phi.len(),
                phi_dot.len()
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(SteError::InvalidGrid(format!("grid spacing {h} must be positive")));
        }
        if let Some(r) = rabi.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(SteError::NonPositiveFrequency(*r));
        }
        let t: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        let omega = rabi.iter().zip(&phi).map(|(r, p)| r * p.cos()).collect();
        let epsilon = rabi.iter().zip(&phi).map(|(r, p)| r * p.sin()).collect();
        let mu: Vec<f64> = rabi.iter().zip(&phi_dot).map(|(r, pd)| -pd / r).collect();
        let kap: Vec<f64> = mu.iter().map(|m| kappa(*m)).collect();
        let alpha = kap.iter().zip(&rabi).map(|(k, r)| k * r).collect();
        Ok(Self {
            h,
            t,
            omega,
            epsilon,
            rabi,
            phi,
            phi_dot,
            mu,
            kappa: kap,
            alpha,
            initial_fields: None,
            diagnostics: SynthesisDiagnostics::default(),
        })
    }

    /// Time-independent fields ω = Ω̄, ε = 0.
    pub fn constant(rabi: f64, tf: f64, points: usize) -> Result<Self> {
        if points < 3 {
            return Err(SteError::InvalidGrid("need at least 3 samples".into()));
        }
        let h = tf / (points - 1) as f64;
        Self::from_rabi_phase(h, vec![rabi; points], vec![0.0; points], vec![0.0; points])
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn tf(&self) -> f64 {
        self.t[self.len() - 1]
    }

    pub fn frame(&self, i: usize) -> BasisFrame {
        BasisFrame::new(self.omega[i], self.epsilon[i]).expect("rabi > 0 checked at construction")
    }

    /// Operator frame at t = 0⁻: the pre-jump fields if any, else the first sample.
    pub fn initial_frame(&self) -> Result<BasisFrame> {
        match self.initial_fields {
            Some((o, e)) => BasisFrame::new(o, e),
            None => Ok(self.frame(0)),
        }
    }

    /// Grid stride for an integration step dt: the nearest even multiple of h,
    /// which must tile the grid exactly.
    pub fn stride_for(&self, dt: f64) -> Result<usize> {
        if !(dt > 0.0) {
            return Err(SteError::InvalidGrid(format!("step {dt} must be positive")));
        }
        let s = 2 * ((dt / (2.0 * self.h)).round() as usize).max(1);
        if (self.len() - 1) % s != 0 {
            return Err(SteError::InvalidGrid(format!(
                "step {dt} (stride {s}) does not tile a grid of {} intervals",
                self.len() - 1
            )));
        }
        Ok(s)
    }

    /// Fractional grid position of t, erroring outside [0, t_f].
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let tf = self.tf();
        let slack = 1e-12 * tf.max(1.0);
        if !(t >= -slack && t <= tf + slack) {
            return Err(SteError::OutOfRange { t, tf });
        }
        let x = (t / self.h).clamp(0.0, (self.len() - 1) as f64);
        let i = (x.floor() as usize).min(self.len() - 2);
        Ok((i, x - i as f64))
    }

    /// Linear interpolation of a sampled field.
    pub fn interp(&self, field: &[f64], t: f64) -> Result<f64> {
        let (i, w) = self.locate(t)?;
        Ok(field[i] * (1.0 - w) + field[i + 1] * w)
    }

    /// Centered finite difference of a sampled field, one-sided at the ends.
    pub fn derivative(&self, field: &[f64]) -> Vec<f64> {
        finite_difference(field, self.h)
    }

    /// max over the grid of (dμ/dt)/(2κ²Ω̄); values ≥ 1 flag a violation of
    /// the slow-acceleration condition underlying the inertial solution.
    pub fn inertial_monitor(&self) -> f64 {
        let dmu = self.derivative(&self.mu);
        dmu.iter()
            .zip(self.kappa.iter().zip(&self.rabi))
            .map(|(d, (k, r))| d.abs() / (2.0 * k * k * r))
            .fold(0.0, f64::max)
    }
}

/// Centered differences in the interior, second-order one-sided at the ends.
pub fn finite_difference(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        if n == 2 {
            let s = (f[1] - f[0]) / h;
            d[0] = s;
            d[1] = s;
        }
        return d;
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d
}

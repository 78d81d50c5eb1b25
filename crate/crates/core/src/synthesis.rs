//! Reverse engineering of the driving protocol.
//!
//! A quintic y(t) = e^{β(t)} joins the initial and target Gibbs states with
//! stationary endpoints. The phase Φ(t) = a(t² + bt³) fixes the rotation of
//! the drive, and at every grid point the effective frequency α is the root
//! of β̇ = g(α), from which Ω̄ = √(α² − Φ̇²) and ω = Ω̄cosΦ, ε = Ω̄sinΦ follow.

use crate::error::{Result, SteError};
use crate::protocol::{ControlProtocol, SynthesisDiagnostics};
use crate::rates::{rates, BathSpec};
use crate::roots::{bisect_secant, sign_changes};
use nalgebra::{Matrix6, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// α is searched up to this multiple of max(Ω̄_i, Ω̄_f).
pub const ALPHA_MAX_FACTOR: f64 = 100.0;
/// Points in the logarithmic sign-change scan for α.
const SCAN_POINTS: usize = 600;
/// Residual target for the α root.
const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub rabi_i: f64,
    pub rabi_f: f64,
    pub temp_i: f64,
    pub temp_f: f64,
    pub tf: f64,
    pub phase_a: f64,
    pub phase_b: f64,
    pub grid_points: usize,
    pub bath: BathSpec,
}

impl SynthesisConfig {
    /// Config with the default phase a = 10/t_f², b = −2/(3t_f).
    pub fn new(
        rabi_i: f64,
        rabi_f: f64,
        temp_i: f64,
        temp_f: f64,
        tf: f64,
        grid_points: usize,
        bath: BathSpec,
    ) -> Result<Self> {
        let cfg = Self {
            rabi_i,
            rabi_f,
            temp_i,
            temp_f,
            tf,
            phase_a: default_phase_a(tf),
            phase_b: default_phase_b(tf),
            grid_points,
            bath,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rabi_i", self.rabi_i),
            ("rabi_f", self.rabi_f),
            ("temp_i", self.temp_i),
            ("temp_f", self.temp_f),
            ("tf", self.tf),
            ("temp_bath", self.bath.temperature),
            ("rate_prefactor", self.bath.prefactor),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SteError::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.phase_a.is_finite() && self.phase_b.is_finite()) {
            return Err(SteError::Config("phase coefficients must be finite".into()));
        }
        if self.grid_points < 100 {
            return Err(SteError::Config(format!("grid_points must be at least 100, got {}", self.grid_points)));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.tf / (self.grid_points - 1) as f64
    }

    pub fn alpha_max(&self) -> f64 {
        ALPHA_MAX_FACTOR * self.rabi_i.max(self.rabi_f)
    }
}

pub fn default_phase_a(tf: f64) -> f64 {
    10.0 / (tf * tf)
}

pub fn default_phase_b(tf: f64) -> f64 {
    -2.0 / (3.0 * tf)
}

/// Grid size that places integration steps of about `dt` on every other sample.
pub fn default_grid_points(tf: f64, dt: f64) -> usize {
    let steps = (tf / dt).ceil().max(50.0) as usize;
    2 * steps + 1
}

/// (y, y′, y″) at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConditions {
    pub tf: f64,
    pub start: [f64; 3],
    pub end: [f64; 3],
}

/// Stationary Gibbs endpoint: β from (Ω̄, T), β̇ from the reduced equation at
/// α = Ω̄, β̈ from its derivative with α̇ = 0, mapped to y = e^β.
fn endpoint(rabi: f64, temp: f64, bath: &BathSpec) -> Result<([f64; 3], [f64; 3])> {
    let beta = -rabi / temp;
    let r = rates(rabi, bath)?;
    let bd = (r.k_up * (1.0 + (-beta).exp()) - r.k_down * (beta.exp() + 1.0)) / 4.0;
    let bdd = bd * (-r.k_up * (-beta).exp() - r.k_down * beta.exp()) / 4.0;
    let y = beta.exp();
    Ok(([beta, bd, bdd], [y, y * bd, y * (bdd + bd * bd)]))
}

pub fn boundary_conditions(cfg: &SynthesisConfig) -> Result<BoundaryConditions> {
    let (_, start) = endpoint(cfg.rabi_i, cfg.temp_i, &cfg.bath)?;
    let (_, end) = endpoint(cfg.rabi_f, cfg.temp_f, &cfg.bath)?;
    Ok(BoundaryConditions { tf: cfg.tf, start, end })
}

/// (β, β̇, β̈) at both ends.
pub fn beta_boundary(cfg: &SynthesisConfig) -> Result<([f64; 3], [f64; 3])> {
    Ok((endpoint(cfg.rabi_i, cfg.temp_i, &cfg.bath)?.0, endpoint(cfg.rabi_f, cfg.temp_f, &cfg.bath)?.0))
}

/// y(t) = Σ b_k t^k, stored in the scaled variable s = t/t_f for conditioning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuinticAnsatz {
    pub tf: f64,
    pub scaled: [f64; 6],
}

impl QuinticAnsatz {
    /// Coefficients b_k in physical time.
    pub fn coefficients(&self) -> [f64; 6] {
        let mut b = [0.0; 6];
        for (k, bk) in b.iter_mut().enumerate() {
            *bk = self.scaled[k] / self.tf.powi(k as i32);
        }
        b
    }

    /// (y, y′, y″) at time t.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        let s = t / self.tf;
        let c = &self.scaled;
        let mut y = 0.0;
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for k in (0..6).rev() {
            y = y * s + c[k];
            if k >= 1 {
                d1 = d1 * s + k as f64 * c[k];
            }
            if k >= 2 {
                d2 = d2 * s + (k * (k - 1)) as f64 * c[k];
            }
        }
        [y, d1 / self.tf, d2 / (self.tf * self.tf)]
    }

    /// (β, β̇) at time t.
    pub fn beta(&self, t: f64) -> Result<(f64, f64)> {
        let [y, yp, _] = self.eval(t);
        if !(y > 0.0) {
            return Err(SteError::NonPositiveAnsatz { t, value: y });
        }
        Ok((y.ln(), yp / y))
    }

    /// Errors if y is not positive at any of `points` uniform samples.
    pub fn check_positive(&self, points: usize) -> Result<()> {
        for i in 0..points {
            let t = self.tf * i as f64 / (points - 1) as f64;
            let y = self.eval(t)[0];
            if !(y > 0.0) {
                return Err(SteError::NonPositiveAnsatz { t, value: y });
            }
        }
        Ok(())
    }
}

/// Unique quintic matching value, slope and curvature at both ends.
pub fn quintic_fit(bcs: &BoundaryConditions) -> Result<QuinticAnsatz> {
    let tf = bcs.tf;
    if !(tf > 0.0) {
        return Err(SteError::SingularSystem);
    }
    let mut a = Matrix6::<f64>::zeros();
    let mut r = Vector6::<f64>::zeros();
    // s = 0 rows
    a[(0, 0)] = 1.0;
    a[(1, 1)] = 1.0;
    a[(2, 2)] = 2.0;
    // s = 1 rows
    for k in 0..6 {
        let kf = k as f64;
        a[(3, k)] = 1.0;
        a[(4, k)] = kf;
        a[(5, k)] = kf * (kf - 1.0);
    }
    let scale = [1.0, tf, tf * tf];
    for j in 0..3 {
        r[j] = bcs.start[j] * scale[j];
        r[3 + j] = bcs.end[j] * scale[j];
    }
    let sol = a.lu().solve(&r).ok_or(SteError::SingularSystem)?;
    let residual = (a * sol - r).amax();
    if !(residual <= 1e-10 * (1.0 + r.amax())) {
        return Err(SteError::SingularSystem);
    }
    let ans = QuinticAnsatz { tf, scaled: [sol[0], sol[1], sol[2], sol[3], sol[4], sol[5]] };
    ans.check_positive(1001)?;
    Ok(ans)
}

/// (Φ, Φ̇) with Φ = a(t² + bt³).
pub fn phase(cfg: &SynthesisConfig, t: f64) -> (f64, f64) {
    let (a, b) = (cfg.phase_a, cfg.phase_b);
    (a * (t * t + b * t * t * t), a * (2.0 * t + 3.0 * b * t * t))
}

/// Root of the per-time inversion together with scan diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaRoot {
    pub alpha: f64,
    pub residual: f64,
    pub sign_changes: usize,
}

/// F(α) = β̇ − (1/4κ²)[k↑(1 + e^{−β}) − k↓(1 + e^β)] with κ² = α²/(α² − Φ̇²).
fn residual(alpha: f64, beta: f64, beta_dot: f64, phi_dot: f64, bath: &BathSpec) -> f64 {
    let Ok(r) = rates(alpha, bath) else {
        return f64::NAN;
    };
    let p = phi_dot.abs();
    let inv_k2 = (alpha - p) * (alpha + p) / (alpha * alpha);
    beta_dot - inv_k2 * (r.k_up * (1.0 + (-beta).exp()) - r.k_down * (1.0 + beta.exp())) / 4.0
}

/// Solve for α on (|Φ̇|(1 + 1e-9), α_max]. When the scan sees several sign
/// changes the largest root is taken: it is the branch continuous with the
/// adiabatic limit α → Ω̄, while the small roots sit next to α = |Φ̇|
/// where Ω̄ collapses.
pub fn solve_alpha(
    t: f64,
    beta: f64,
    beta_dot: f64,
    phi_dot: f64,
    bath: &BathSpec,
    alpha_max: f64,
) -> Result<AlphaRoot> {
    let lo = phi_dot.abs() * (1.0 + 1e-9);
    if !(alpha_max > lo) {
        return Err(SteError::NoRoot { t, beta_dot });
    }
    let span = alpha_max - lo;
    let d_min = 1e-9 * lo.max(1e-3 * alpha_max);
    let ratio = (span / d_min).ln();
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|j| {
            if j + 1 == SCAN_POINTS {
                alpha_max
            } else {
                lo + d_min * (ratio * j as f64 / (SCAN_POINTS - 1) as f64).exp()
            }
        })
        .collect();
    let f = |a: f64| residual(a, beta, beta_dot, phi_dot, bath);
    let values: Vec<f64> = grid.iter().map(|&a| f(a)).collect();
    let changes = sign_changes(&values);
    let Some(&last) = changes.last() else {
        return Err(SteError::NoRoot { t, beta_dot });
    };
    let root = bisect_secant(f, grid[last], grid[last + 1], ROOT_TOLERANCE).ok_or(SteError::NoRoot { t, beta_dot })?;
    Ok(AlphaRoot { alpha: root.x, residual: root.fx, sign_changes: changes.len() })
}

/// The synthesized protocol together with the ansatz it inverts.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub protocol: ControlProtocol,
    pub ansatz: QuinticAnsatz,
}

impl Synthesis {
    /// Target β(t) on the protocol grid.
    pub fn beta_target(&self) -> Vec<f64> {
        self.protocol.t.iter().map(|&t| self.ansatz.eval(t)[0].ln()).collect()
    }
}

pub fn synthesize_with_ansatz(cfg: &SynthesisConfig) -> Result<Synthesis> {
    cfg.validate()?;
    let ansatz = quintic_fit(&boundary_conditions(cfg)?)?;
    let h = cfg.h();
    let n = cfg.grid_points;
    let alpha_max = cfg.alpha_max();
    let samples: Vec<(f64, f64, f64, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = if i + 1 == n { cfg.tf } else { i as f64 * h };
            let (beta, beta_dot) = ansatz.beta(t)?;
            let (phi, phi_dot) = phase(cfg, t);
            let root = solve_alpha(t, beta, beta_dot, phi_dot, &cfg.bath, alpha_max)?;
            let p = phi_dot.abs();
            let rabi = ((root.alpha - p) * (root.alpha + p)).sqrt();
            Ok((rabi, phi, phi_dot, root.sign_changes))
        })
        .collect::<Result<_>>()?;
    let rabi = samples.iter().map(|s| s.0).collect();
    let phi = samples.iter().map(|s| s.1).collect();
    let phi_dot = samples.iter().map(|s| s.2).collect();
    let mut protocol = ControlProtocol::from_rabi_phase(h, rabi, phi, phi_dot)?;
    protocol.diagnostics = SynthesisDiagnostics {
        multiple_root_points: samples.iter().filter(|s| s.3 > 1).count(),
        max_sign_changes: samples.iter().map(|s| s.3).max().unwrap_or(0),
    };
    if protocol.diagnostics.multiple_root_points > 0 {
        log::info!(
            "alpha inversion saw multiple roots at {} grid points; largest root taken",
            protocol.diagnostics.multiple_root_points
        );
    }
    Ok(Synthesis { protocol, ansatz })
}

pub fn synthesize(cfg: &SynthesisConfig) -> Result<ControlProtocol> {
    Ok(synthesize_with_ansatz(cfg)?.protocol)
}

/// Sudden jump to the target Hamiltonian at t = 0⁺ followed by passive relaxation.
pub fn quench_protocol(cfg: &SynthesisConfig) -> Result<ControlProtocol> {
    cfg.validate()?;
    let n = cfg.grid_points;
    let mut p = ControlProtocol::from_rabi_phase(cfg.h(), vec![cfg.rabi_f; n], vec![0.0; n], vec![0.0; n])?;
    p.initial_fields = Some((cfg.rabi_i, 0.0));
    Ok(p)
}

/// ln(2cosh(x)) without overflow.
fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// Quasi-static isothermal work ΔF = −T_B ln(Z_f/Z_i), Z = 2cosh(Ω̄/2T_B).
pub fn adiabatic_work(rabi_i: f64, rabi_f: f64, t_b: f64) -> f64 {
    -t_b * (ln_two_cosh(rabi_f / (2.0 * t_b)) - ln_two_cosh(rabi_i / (2.0 * t_b)))
}

pub fn adiabatic_work_for(cfg: &SynthesisConfig) -> f64 {
    adiabatic_work(cfg.rabi_i, cfg.rabi_f, cfg.bath.temperature)
}

//! Bath-free evolution: the inertial Heisenberg map, an exact time-ordered
//! propagator used as oracle, picture conversion and state metrics.

use crate::error::{Result, SteError};
use crate::linalg::{c, det, herm_eig, trace, Mat2, C64, I};
use crate::protocol::ControlProtocol;
use crate::su2::{v_matrix, BasisFrame, Mat3};
use nalgebra::Vector3;

/// Cumulative trapezoidal integral of a sampled field.
pub fn cumulative_integral(field: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(field.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in field.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Trapezoidal ∫₀ᵗ f dt′ with linear interpolation inside the last interval.
fn integral_to(protocol: &ControlProtocol, field: &[f64], t: f64) -> Result<f64> {
    let tf = protocol.tf();
    if !(t >= -1e-12 * tf.max(1.0) && t <= tf * (1.0 + 1e-12)) {
        return Err(SteError::OutOfRange { t, tf });
    }
    let h = protocol.h;
    let x = (t / h).clamp(0.0, (protocol.len() - 1) as f64);
    let i = (x.floor() as usize).min(protocol.len() - 2);
    let w = x - i as f64;
    let mut acc = 0.0;
    for k in 0..i {
        acc += 0.5 * h * (field[k] + field[k + 1]);
    }
    let fi = field[i] * (1.0 - w) + field[i + 1] * w;
    acc += 0.5 * w * h * (field[i] + fi);
    Ok(acc)
}

/// θ̄(t) = ∫₀ᵗ Ω̄ dt′.
pub fn theta_bar(protocol: &ControlProtocol, t: f64) -> Result<f64> {
    integral_to(protocol, &protocol.rabi, t)
}

/// Map v̂(0) → v̂(t) on the basis (H, L, C): v̂_i(t) = scale·Σ_j map_ij v̂_j(0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergFrame {
    pub map: Mat3,
    pub scale: f64,
}

impl HeisenbergFrame {
    /// V(μ) diag(1, e^{−iφ}, e^{iφ}) V⁻¹(μ) with φ = ∫κΩ̄ dt.
    pub fn new(mu: f64, phase: f64, scale: f64) -> Self {
        let (v, vinv) = v_matrix(mu);
        let d = Mat3::from_diagonal(&Vector3::new(c(1.0), (-I * phase).exp(), (I * phase).exp()));
        Self { map: v * d * vinv, scale }
    }

    pub fn identity() -> Self {
        Self { map: Mat3::identity(), scale: 1.0 }
    }

    /// Heisenberg-picture operators (H, L, C)(t) expressed through frame-0 operators.
    pub fn operators(&self, frame0: &BasisFrame) -> [Mat2; 3] {
        let v = frame0.ops();
        let mut out = [Mat2::zeros(); 3];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                *o += vj * (self.map[(i, j)] * self.scale);
            }
        }
        out
    }

    /// ⟨(H, L, C)(t)⟩ from the frame-0 expectations in the interaction-picture state.
    pub fn evolve_expectations(&self, e0: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            let s: C64 = (0..3).map(|j| self.map[(i, j)] * e0[j]).sum();
            *o = self.scale * s.re;
        }
        out
    }
}

/// Inertial solution at time t, with μ linearly interpolated between samples.
pub fn inertial_heisenberg(protocol: &ControlProtocol, t: f64) -> Result<HeisenbergFrame> {
    let mu = protocol.interp(&protocol.mu, t)?;
    let phase = integral_to(protocol, &protocol.alpha, t)?;
    let scale = protocol.interp(&protocol.rabi, t)? / protocol.rabi[0];
    Ok(HeisenbergFrame::new(mu, phase, scale))
}

/// Inertial maps at every `stride`-th grid sample.
pub fn inertial_series(protocol: &ControlProtocol, stride: usize) -> Vec<HeisenbergFrame> {
    let phase = cumulative_integral(&protocol.alpha, protocol.h);
    (0..protocol.len())
        .step_by(stride.max(1))
        .map(|i| HeisenbergFrame::new(protocol.mu[i], phase[i], protocol.rabi[i] / protocol.rabi[0]))
        .collect()
}

/// Result of monitoring the slow-acceleration condition dμ/dt < 2κ²Ω̄.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertialCheck {
    pub max_ratio: f64,
    pub violated: bool,
}

/// Evaluate the inertial condition; a violation is logged, or returned as an
/// error when `strict` is set.
pub fn check_inertial_condition(protocol: &ControlProtocol, strict: bool) -> Result<InertialCheck> {
    let max_ratio = protocol.inertial_monitor();
    let violated = max_ratio >= 1.0;
    if violated {
        if strict {
            return Err(SteError::InertialViolation(max_ratio));
        }
        log::warn!("inertial condition violated: max (dmu/dt)/(2 kappa^2 rabi) = {max_ratio:.3}");
    }
    Ok(InertialCheck { max_ratio, violated })
}

/// Schrödinger-picture state at time t from the interaction-picture state:
/// expectations of (H, L, C)(t) come from the Heisenberg map, then the state
/// is rebuilt in the instantaneous frame.
pub fn schrodinger_state(rho_tilde: &Mat2, frame0: &BasisFrame, frame_t: &BasisFrame, map: &HeisenbergFrame) -> Mat2 {
    let e0 = frame0.expectations(rho_tilde);
    let et = map.evolve_expectations(e0);
    crate::su2::from_bloch(frame_t.spin_from_expectations(et))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitaryPropagator {
    pub t: f64,
    pub u: Mat2,
}

/// exp(−iHτ) for H = ωS_z + εS_x.
pub fn step_unitary(omega: f64, epsilon: f64, tau: f64) -> Mat2 {
    let r = omega.hypot(epsilon);
    if r == 0.0 {
        return Mat2::identity();
    }
    let half = 0.5 * r * tau;
    let (s, co) = half.sin_cos();
    let nz = omega / r;
    let nx = epsilon / r;
    // cos(x) I − i sin(x) (n·σ)
    Mat2::new(C64::new(co, -s * nz), C64::new(0.0, -s * nx), C64::new(0.0, -s * nx), C64::new(co, s * nz))
}

/// Midpoint-exponential time-ordered propagator: U(t + dt) = exp(−iH(t + dt/2)dt)U(t),
/// with the midpoint Hamiltonian taken from the grid sample. Returns U at every step.
pub fn exact_propagate(protocol: &ControlProtocol, dt_fine: f64) -> Result<Vec<UnitaryPropagator>> {
    let s = protocol.stride_for(dt_fine)?;
    let tau = s as f64 * protocol.h;
    let mut u = Mat2::identity();
    let mut out = Vec::with_capacity((protocol.len() - 1) / s + 1);
    out.push(UnitaryPropagator { t: 0.0, u });
    let mut i = 0;
    while i + s < protocol.len() {
        let m = i + s / 2;
        u = step_unitary(protocol.omega[m], protocol.epsilon[m], tau) * u;
        i += s;
        out.push(UnitaryPropagator { t: protocol.t[i], u });
    }
    Ok(out)
}

/// ρ = UρU†.
pub fn to_schrodinger(rho_tilde: &Mat2, u: &Mat2) -> Mat2 {
    u * rho_tilde * u.adjoint()
}

/// Checks the density-matrix contract used by the metrics.
pub fn validate_state(rho: &Mat2) -> Result<()> {
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(SteError::InvalidState(format!("trace {tr}")));
    }
    if crate::linalg::fro(&(rho - rho.adjoint())) > 1e-8 {
        return Err(SteError::InvalidState("not Hermitian".into()));
    }
    let (vals, _) = herm_eig(rho);
    if vals[0] < -1e-10 {
        return Err(SteError::InvalidState(format!("min eigenvalue {:e}", vals[0])));
    }
    Ok(())
}

/// Uhlmann fidelity [tr√(√ρ₁ρ₂√ρ₁)]², via the qubit identity
/// F = tr(ρ₁ρ₂) + 2√(det ρ₁ det ρ₂).
pub fn fidelity(rho1: &Mat2, rho2: &Mat2) -> Result<f64> {
    validate_state(rho1)?;
    validate_state(rho2)?;
    let overlap = trace(&(rho1 * rho2)).re;
    let d = det(rho1).re.max(0.0) * det(rho2).re.max(0.0);
    Ok((overlap + 2.0 * d.sqrt()).clamp(0.0, 1.0))
}

pub const ACCURACY_CLIP: f64 = 16.0;

/// 𝒜 = −log₁₀(1 − ℱ), clipped at 16.
pub fn accuracy(rho_final: &Mat2, rho_target: &Mat2) -> Result<f64> {
    Ok(accuracy_from_fidelity(fidelity(rho_final, rho_target)?))
}

pub fn accuracy_from_fidelity(f: f64) -> f64 {
    let deficit = 1.0 - f;
    if deficit <= 10f64.powf(-ACCURACY_CLIP) {
        ACCURACY_CLIP
    } else {
        (-deficit.log10()).min(ACCURACY_CLIP)
    }
}

/// ½‖ρ₁ − ρ₂‖₁.
pub fn trace_distance(rho1: &Mat2, rho2: &Mat2) -> f64 {
    let (vals, _) = herm_eig(&crate::linalg::hermitian_part(&(rho1 - rho2)));
    0.5 * (vals[0].abs() + vals[1].abs())
}

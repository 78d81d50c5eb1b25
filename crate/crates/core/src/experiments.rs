//! Configuration, presets and the end-to-end pipeline behind the CLI.
//!
//! A run synthesizes the protocol, integrates the master equation, builds the
//! thermodynamic ledger and compares the exactly propagated final state with
//! the target Gibbs state. Sweeps repeat this over a list of durations.

use crate::dynamics::{gibbs_state, integrate, superoperator_integrate, GibbsParameters, Trajectory};
use crate::error::{Result, SteError};
use crate::linalg::Mat2;
use crate::propagation::{
    accuracy_from_fidelity, check_inertial_condition, exact_propagate, fidelity, inertial_heisenberg,
    schrodinger_state, to_schrodinger, trace_distance,
};
use crate::protocol::{ControlProtocol, SynthesisDiagnostics};
use crate::rates::{rates, BathSpec, RatePair, DEFAULT_BATH_TEMPERATURE, DEFAULT_PREFACTOR};
use crate::synthesis::{
    adiabatic_work_for, default_grid_points, default_phase_a, default_phase_b, quench_protocol, synthesize_with_ansatz,
    SynthesisConfig,
};
use crate::thermo::{build_ledger, speed_limit_bound, work_efficiency, Direction, SpeedLimitForm, ThermoLedger};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

/// Reference Rabi frequency setting the time unit 2π/Ω̄_ref.
pub const RABI_REF: f64 = 5.0;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_OUTDIR: &str = "out";

/// Default duration 6·(2π/Ω̄_ref).
pub fn default_tf() -> f64 {
    periods(6.0)
}

/// m·(2π/Ω̄_ref).
pub fn periods(m: f64) -> f64 {
    m * TAU / RABI_REF
}

/// A named state-to-state transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preset {
    pub name: &'static str,
    pub label: &'static str,
    /// Tabulated frequencies; runs use them reversed (expansion lowers Ω̄)
    /// unless `table_orientation` is set.
    pub table_rabi_i: f64,
    pub table_rabi_f: f64,
    pub temp_i: f64,
    pub temp_f: f64,
}

impl Preset {
    /// (Ω̄_i, Ω̄_f) for a run: expansion lowers the frequency (12 → 5) unless
    /// `table_orientation` asks for the tabulated order.
    pub fn frequencies(&self, table_orientation: bool) -> (f64, f64) {
        if table_orientation {
            (self.table_rabi_i, self.table_rabi_f)
        } else {
            (self.table_rabi_f, self.table_rabi_i)
        }
    }
}

pub const PRESETS: [Preset; 5] = [
    Preset { name: "pe", label: "PE (expansion)", table_rabi_i: 5.0, table_rabi_f: 12.0, temp_i: 5.0, temp_f: 5.0 },
    Preset { name: "pc", label: "PC (compression)", table_rabi_i: 12.0, table_rabi_f: 5.0, temp_i: 5.0, temp_f: 5.0 },
    Preset { name: "pe1", label: "PE1", table_rabi_i: 5.0, table_rabi_f: 12.0, temp_i: 15.0, temp_f: 5.0 },
    Preset { name: "pe2", label: "PE2", table_rabi_i: 5.0, table_rabi_f: 12.0, temp_i: 4.0, temp_f: 5.0 },
    Preset { name: "pec", label: "PEC", table_rabi_i: 5.0, table_rabi_f: 12.0, temp_i: 5.0, temp_f: 4.0 },
];

pub fn preset(name: &str) -> Result<&'static Preset> {
    let key = name.to_ascii_lowercase();
    PRESETS
        .iter()
        .find(|p| p.name == key)
        .ok_or_else(|| SteError::Config(format!("unknown preset '{name}' (expected one of pe, pc, pe1, pe2, pec)")))
}

/// The JSON configuration document. Every key is optional; explicit values
/// override the preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub rabi_i: Option<f64>,
    pub rabi_f: Option<f64>,
    pub temp_i: Option<f64>,
    pub temp_f: Option<f64>,
    pub temp_bath: Option<f64>,
    pub tf: Option<f64>,
    pub phase_a: Option<f64>,
    pub phase_b: Option<f64>,
    pub grid_points: Option<usize>,
    pub dt: Option<f64>,
    pub rate_prefactor: Option<f64>,
    pub verify: Option<bool>,
    pub outdir: Option<String>,
    pub tf_list: Option<Vec<f64>>,
    pub table_orientation: Option<bool>,
    pub speed_limit_form: Option<SpeedLimitForm>,
}

impl RunConfig {
    pub fn for_preset(name: &str) -> Self {
        Self { preset: Some(name.to_string()), ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SteError::Config(format!("invalid config: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SteError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Validate and fill defaults for one duration (`tf` overrides the config).
    pub fn resolve(&self, tf: Option<f64>) -> Result<ResolvedConfig> {
        let table = self.table_orientation.unwrap_or(false);
        let base = self.preset.as_deref().map(preset).transpose()?;
        let (pi, pf) = base.map(|p| p.frequencies(table)).unzip();
        let need = |v: Option<f64>, fallback: Option<f64>, key: &str| {
            v.or(fallback).ok_or_else(|| SteError::Config(format!("'{key}' is required when no preset is given")))
        };
        let rabi_i = need(self.rabi_i, pi, "rabi_i")?;
        let rabi_f = need(self.rabi_f, pf, "rabi_f")?;
        let temp_i = need(self.temp_i, base.map(|p| p.temp_i), "temp_i")?;
        let temp_f = need(self.temp_f, base.map(|p| p.temp_f), "temp_f")?;
        let tf = tf.or(self.tf).unwrap_or_else(default_tf);
        if !(tf > 0.0 && tf.is_finite()) {
            return Err(SteError::Config(format!("tf must be positive, got {tf}")));
        }
        let dt = self.dt.unwrap_or(DEFAULT_DT);
        if !(dt > 0.0 && dt < tf / 2.0) {
            return Err(SteError::Config(format!("dt must lie in (0, tf/2), got {dt}")));
        }
        let bath = BathSpec::new(
            self.temp_bath.unwrap_or(DEFAULT_BATH_TEMPERATURE),
            self.rate_prefactor.unwrap_or(DEFAULT_PREFACTOR),
        )?;
        let grid_points = self.grid_points.unwrap_or_else(|| default_grid_points(tf, dt));
        let synthesis = SynthesisConfig {
            rabi_i,
            rabi_f,
            temp_i,
            temp_f,
            tf,
            phase_a: self.phase_a.unwrap_or_else(|| default_phase_a(tf)),
            phase_b: self.phase_b.unwrap_or_else(|| default_phase_b(tf)),
            grid_points,
            bath,
        };
        synthesis.validate()?;
        let h = synthesis.h();
        let stride = 2 * ((dt / (2.0 * h)).round() as usize).max(1);
        if (grid_points - 1) % stride != 0 {
            return Err(SteError::Config(format!(
                "grid_points = {grid_points} is not tiled by steps of dt = {dt} (stride {stride})"
            )));
        }
        if let Some(list) = &self.tf_list {
            if list.is_empty() || list.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                return Err(SteError::Config("tf_list must be a non-empty list of positive durations".into()));
            }
        }
        Ok(ResolvedConfig {
            label: self.preset.as_deref().map(str::to_ascii_lowercase).unwrap_or_else(|| "custom".into()),
            synthesis,
            dt: stride as f64 * h,
            verify: self.verify.unwrap_or(false),
            speed_limit_form: self.speed_limit_form.unwrap_or_default(),
        })
    }
}

/// A fully specified single run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub label: String,
    pub synthesis: SynthesisConfig,
    /// Integration step actually used (an even multiple of the grid spacing).
    pub dt: f64,
    pub verify: bool,
    pub speed_limit_form: SpeedLimitForm,
}

impl ResolvedConfig {
    pub fn initial_parameters(&self) -> GibbsParameters {
        GibbsParameters::gibbs(-self.synthesis.rabi_i / self.synthesis.temp_i)
    }

    pub fn direction(&self) -> Direction {
        Direction::of(self.synthesis.rabi_i, self.synthesis.rabi_f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedLimitReport {
    pub bound: f64,
    pub ln_purity_ratio: f64,
    pub holds: bool,
    pub form: SpeedLimitForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InertialReport {
    pub max_ratio: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyReport {
    /// Largest trace distance between the parameterized and Liouville-space trajectories.
    pub max_trace_distance: f64,
    /// Largest off-diagonal element of the Liouville-space state in the ξ eigenbasis.
    pub max_coherence: f64,
}

/// Summary scalars of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub label: String,
    pub config: ResolvedConfig,
    pub direction: Direction,
    /// Fidelity of the exactly propagated final state with the target Gibbs state.
    pub fidelity: f64,
    pub accuracy: f64,
    /// Accuracy of the inertial-picture final state.
    pub accuracy_inertial: f64,
    /// Accuracy of the quench baseline of the same duration.
    pub accuracy_quench: f64,
    pub work: f64,
    pub heat: f64,
    pub delta_energy: f64,
    pub delta_s_universe: f64,
    pub work_adiabatic: f64,
    pub eta_w: Option<f64>,
    pub speed_limit: SpeedLimitReport,
    pub t_eff_initial: f64,
    pub t_eff_final: f64,
    pub beta_final: f64,
    /// Largest |β(t) − β_ansatz(t)| over the integration samples.
    pub beta_ansatz_error: f64,
    pub first_law_residual: f64,
    pub min_sigma_dot: f64,
    /// min over samples of S_E − S_VN.
    pub min_entropy_gap: f64,
    pub inertial: InertialReport,
    pub synthesis: SynthesisDiagnostics,
    pub max_step_error_estimate: f64,
    pub verify: Option<VerifyReport>,
    pub files: Vec<String>,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub protocol: ControlProtocol,
    pub trajectory: Trajectory,
    pub ledger: ThermoLedger,
    pub beta_target: Vec<f64>,
}

/// Exactly propagated Schrödinger state at t_f from the interaction-picture state.
pub fn exact_final_state(protocol: &ControlProtocol, rho_tilde_f: &Mat2, dt: f64) -> Result<Mat2> {
    let us = exact_propagate(protocol, dt)?;
    Ok(to_schrodinger(rho_tilde_f, &us.last().expect("at least one step").u))
}

/// Target Gibbs state of H_S(t_f) at T_f.
pub fn target_state(protocol: &ControlProtocol, temp_f: f64) -> Mat2 {
    gibbs_state(&protocol.frame(protocol.len() - 1).h, temp_f)
}

/// Accuracy of a quench of the same duration: jump to Ω̄_f at t = 0⁺, relax.
pub fn quench_accuracy(cfg: &ResolvedConfig) -> Result<f64> {
    let q = quench_protocol(&cfg.synthesis)?;
    let traj = integrate(cfg.initial_parameters(), &q, &cfg.synthesis.bath, cfg.dt)?;
    let rho_t = *traj.states(&q)?.last().expect("non-empty");
    let rho = exact_final_state(&q, &rho_t, cfg.dt)?;
    Ok(accuracy_from_fidelity(fidelity(&rho, &target_state(&q, cfg.synthesis.temp_f))?))
}

/// Fidelity between exact and inertial propagation of the isolated system
/// from the initial Gibbs state.
pub fn isolated_inertial_fidelity(protocol: &ControlProtocol, rho0: &Mat2, dt: f64) -> Result<f64> {
    let exact = exact_final_state(protocol, rho0, dt)?;
    let map = inertial_heisenberg(protocol, protocol.tf())?;
    let inertial = schrodinger_state(rho0, &protocol.frame(0), &protocol.frame(protocol.len() - 1), &map);
    fidelity(&exact, &inertial)
}

/// Compare the parameterized trajectory with direct Liouville-space integration.
pub fn verify_against_superoperator(
    protocol: &ControlProtocol,
    traj: &Trajectory,
    bath: &BathSpec,
    dt: f64,
) -> Result<VerifyReport> {
    let states = traj.states(protocol)?;
    let oracle = superoperator_integrate(&states[0], protocol, bath, dt)?;
    let frame0 = protocol.frame(0);
    let mut max_td: f64 = 0.0;
    let mut max_coh: f64 = 0.0;
    for (k, (a, b)) in states.iter().zip(&oracle).enumerate() {
        max_td = max_td.max(trace_distance(a, b));
        let eig = crate::su2::eigenoperators(protocol.mu[k * traj.stride], &frame0)?;
        let (_, v) = crate::linalg::herm_eig(&eig.xi);
        let rot = v.adjoint() * b * v;
        max_coh = max_coh.max(rot[(0, 1)].norm());
    }
    Ok(VerifyReport { max_trace_distance: max_td, max_coherence: max_coh })
}

/// Synthesize, integrate, account and verify one configuration.
pub fn simulate(cfg: &ResolvedConfig) -> Result<RunOutcome> {
    let syn = synthesize_with_ansatz(&cfg.synthesis)?;
    let protocol = syn.protocol.clone();
    let inertial = check_inertial_condition(&protocol, false)?;
    let bath = cfg.synthesis.bath;
    let trajectory = integrate(cfg.initial_parameters(), &protocol, &bath, cfg.dt)?;
    let ledger = build_ledger(&protocol, &trajectory, &bath)?;
    let n = ledger.len();

    let target = target_state(&protocol, cfg.synthesis.temp_f);
    let rho_exact = exact_final_state(&protocol, &ledger.states_tilde[n - 1], cfg.dt)?;
    let fid = fidelity(&rho_exact, &target)?;
    let accuracy_inertial = accuracy_from_fidelity(fidelity(&ledger.states[n - 1], &target)?);
    let accuracy_quench = quench_accuracy(cfg)?;

    let beta_target: Vec<f64> = trajectory.t.iter().map(|&t| syn.ansatz.eval(t)[0].ln()).collect();
    let beta_ansatz_error =
        trajectory.params.iter().zip(&beta_target).map(|(p, b)| (p.beta - b).abs()).fold(0.0, f64::max);

    let rate_series: Vec<RatePair> = protocol.alpha.iter().map(|a| rates(*a, &bath)).collect::<Result<_>>()?;
    let bound = speed_limit_bound(&protocol, &rate_series, cfg.speed_limit_form)?;
    let ln_p = ledger.ln_purity_ratio();

    let work = ledger.work[n - 1];
    let w_adi = adiabatic_work_for(&cfg.synthesis);
    let eta_w =
        work_efficiency(work, w_adi, cfg.direction()).ok().filter(|_| cfg.synthesis.rabi_i != cfg.synthesis.rabi_f);

    let verify = if cfg.verify {
        let v = verify_against_superoperator(&protocol, &trajectory, &bath, cfg.dt)?;
        log::info!("superoperator oracle: max trace distance {:.3e}", v.max_trace_distance);
        Some(v)
    } else {
        None
    };

    let report = RunReport {
        label: cfg.label.clone(),
        config: cfg.clone(),
        direction: cfg.direction(),
        fidelity: fid,
        accuracy: accuracy_from_fidelity(fid),
        accuracy_inertial,
        accuracy_quench,
        work,
        heat: ledger.heat[n - 1],
        delta_energy: ledger.energy[n - 1] - ledger.energy[0],
        delta_s_universe: ledger.delta_s_universe[n - 1],
        work_adiabatic: w_adi,
        eta_w,
        speed_limit: SpeedLimitReport {
            bound,
            ln_purity_ratio: ln_p,
            holds: bound >= ln_p,
            form: cfg.speed_limit_form,
        },
        t_eff_initial: ledger.t_eff[0],
        t_eff_final: ledger.t_eff[n - 1],
        beta_final: trajectory.params[n - 1].beta,
        beta_ansatz_error,
        first_law_residual: ledger.first_law_residual(),
        min_sigma_dot: ledger.sigma_dot.iter().cloned().fold(f64::INFINITY, f64::min),
        min_entropy_gap: ledger.s_e.iter().zip(&ledger.s_vn).map(|(e, v)| e - v).fold(f64::INFINITY, f64::min),
        inertial: InertialReport { max_ratio: inertial.max_ratio, violated: inertial.violated },
        synthesis: protocol.diagnostics.clone(),
        max_step_error_estimate: trajectory.max_error_estimate,
        verify,
        files: Vec::new(),
    };
    Ok(RunOutcome { report, protocol, trajectory, ledger, beta_target })
}

/// Output encoding for tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One time-series row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeSeriesRow {
    pub t: f64,
    pub omega: f64,
    pub epsilon: f64,
    pub rabi: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub purity: f64,
    #[serde(rename = "S_vn")]
    pub s_vn: f64,
    #[serde(rename = "S_e")]
    pub s_e: f64,
    pub power: f64,
    pub work: f64,
    pub heat: f64,
    pub sigma_dot: f64,
    #[serde(rename = "T_eff")]
    pub t_eff: f64,
}

pub const TIMESERIES_HEADER: &str =
    "t,omega,epsilon,rabi,mu,alpha,beta,purity,S_vn,S_e,power,work,heat,sigma_dot,T_eff";

impl RunOutcome {
    pub fn rows(&self) -> Vec<TimeSeriesRow> {
        let p = &self.protocol;
        let lg = &self.ledger;
        (0..lg.len())
            .map(|k| {
                let i = self.trajectory.grid_index(k);
                TimeSeriesRow {
                    t: lg.t[k],
                    omega: p.omega[i],
                    epsilon: p.epsilon[i],
                    rabi: p.rabi[i],
                    mu: p.mu[i],
                    alpha: p.alpha[i],
                    beta: self.trajectory.params[k].beta,
                    purity: lg.purity[k],
                    s_vn: lg.s_vn[k],
                    s_e: lg.s_e[k],
                    power: lg.power[k],
                    work: lg.work[k],
                    heat: lg.heat[k],
                    sigma_dot: lg.sigma_dot[k],
                    t_eff: lg.t_eff[k],
                }
            })
            .collect()
    }

    /// Bloch-vector trajectory in the Schrödinger picture.
    pub fn spin_trajectory(&self) -> Vec<SpinRow> {
        self.ledger
            .states
            .iter()
            .zip(&self.ledger.t)
            .map(|(rho, t)| {
                let s = crate::su2::bloch(rho);
                SpinRow { t: *t, sx: s[0], sy: s[1], sz: s[2], purity: crate::linalg::trace(&(rho * rho)).re }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinRow {
    pub t: f64,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub purity: f64,
}

/// One sweep row; failed rows keep their duration and the error message.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub tf: f64,
    pub status: String,
    pub accuracy_ste: Option<f64>,
    pub accuracy_quench: Option<f64>,
    pub work: Option<f64>,
    pub eta_w: Option<f64>,
    pub bound: Option<f64>,
    pub ln_purity_ratio: Option<f64>,
    pub inertial_ratio: Option<f64>,
    pub error: Option<String>,
}

impl SweepRow {
    fn from_result(tf: f64, r: Result<RunReport>) -> Self {
        match r {
            Ok(rep) => SweepRow {
                tf,
                status: "ok".into(),
                accuracy_ste: Some(rep.accuracy),
                accuracy_quench: Some(rep.accuracy_quench),
                work: Some(rep.work),
                eta_w: rep.eta_w,
                bound: Some(rep.speed_limit.bound),
                ln_purity_ratio: Some(rep.speed_limit.ln_purity_ratio),
                inertial_ratio: Some(rep.inertial.max_ratio),
                error: None,
            },
            Err(e) => SweepRow {
                tf,
                status: "failed".into(),
                accuracy_ste: None,
                accuracy_quench: None,
                work: None,
                eta_w: None,
                bound: None,
                ln_purity_ratio: None,
                inertial_ratio: None,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Run every duration concurrently; rows come back ordered by t_f.
pub fn sweep(config: &RunConfig, tf_list: &[f64]) -> Result<Vec<SweepRow>> {
    if tf_list.is_empty() {
        return Err(SteError::Config("empty t_f list".into()));
    }
    let resolved: Vec<ResolvedConfig> = tf_list.iter().map(|&tf| config.resolve(Some(tf))).collect::<Result<_>>()?;
    let mut rows: Vec<SweepRow> = resolved
        .par_iter()
        .map(|cfg| SweepRow::from_result(cfg.synthesis.tf, simulate(cfg).map(|o| o.report)))
        .collect();
    rows.sort_by(|a, b| a.tf.total_cmp(&b.tf));
    Ok(rows)
}

fn write_table<T: Serialize>(path: &Path, rows: &[T], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| SteError::Io(e.to_string()))?;
            for r in rows {
                w.serialize(r).map_err(|e| SteError::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let text = serde_json::to_string_pretty(rows).map_err(|e| SteError::Io(e.to_string()))?;
            std::fs::write(path, text + "\n")?;
        }
    }
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| SteError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Write the time series and the JSON report; returns the report with file paths filled in.
pub fn write_run(outcome: &RunOutcome, outdir: &Path, format: Format) -> Result<RunReport> {
    ensure_dir(outdir)?;
    let label = &outcome.report.label;
    let series = outdir.join(format!("{label}_timeseries.{}", format.extension()));
    write_table(&series, &outcome.rows(), format)?;
    let report_path = outdir.join(format!("{label}_report.json"));
    let mut report = outcome.report.clone();
    report.files = vec![series.display().to_string(), report_path.display().to_string()];
    let text = serde_json::to_string_pretty(&report).map_err(|e| SteError::Io(e.to_string()))?;
    std::fs::write(&report_path, text + "\n")?;
    Ok(report)
}

pub fn write_sweep(rows: &[SweepRow], label: &str, outdir: &Path, format: Format) -> Result<PathBuf> {
    ensure_dir(outdir)?;
    let path = outdir.join(format!("sweep_{label}.{}", format.extension()));
    write_table(&path, rows, format)?;
    Ok(path)
}

pub fn write_trajectory(rows: &[SpinRow], label: &str, outdir: &Path, format: Format) -> Result<PathBuf> {
    ensure_dir(outdir)?;
    let path = outdir.join(format!("trajectory_{label}.{}", format.extension()));
    write_table(&path, rows, format)?;
    Ok(path)
}

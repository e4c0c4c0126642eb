//! Parameter sweeps over ε, remainder fits and hole/boundary diagnostics.
//!
//! A sweep is described by a flat TOML file:
//!
//! ```toml
//! regime = "fixed"        # fixed (Ω = Ω₀/ε), fast (Ω = Ω₁/ε^{1+α}) or constant
//! omega = 4.0             # Ω₀, Ω₁ or Ω
//! eps_list = [0.1, 0.05]
//! nr = 128
//! ntheta = 256
//! bc = "neumann"
//! mode = "both"           # trial_only, minimize or both
//! out_dir = "out"
//! seed = 7
//! ```
//!
//! Each ε produces one JSON record; the CSV table is assembled in `eps_list`
//! order once all runs have finished.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    detect_vortices, normalize, BoundaryCondition, DiscOperator, EnergyForm, GridSpec, WaveField,
};
use crate::minimize::{minimize, random_initial, residual_norm, MinimizeOptions};
use crate::symmetry::anisotropy_index;
use crate::tf::{giant_vortex_energy, tf_solve, TfRegimeParams, TfSolution};
use crate::trial::{build_giant_vortex_trial, build_lattice_trial, TrialFamily, TrialSpec};
use crate::HOLE_THRESHOLD;

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str =
    "eps,omega_eff,E_trial,E_min,E_tf,residual_trial,residual_min,anisotropy,vortex_count,interior_mass,hole_max_density";

/// Smallest ε accepted without `allow_small_eps`.
pub const EPS_FLOOR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeKind {
    Fixed,
    Fast,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    TrialOnly,
    Minimize,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    #[default]
    Trial,
    Random,
}

fn default_bc() -> BoundaryCondition {
    BoundaryCondition::Neumann
}

fn default_mode() -> SweepMode {
    SweepMode::Both
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub regime: RegimeKind,
    pub omega: f64,
    #[serde(default)]
    pub alpha: Option<f64>,
    pub eps_list: Vec<f64>,
    pub nr: usize,
    pub ntheta: usize,
    #[serde(default = "default_bc")]
    pub bc: BoundaryCondition,
    #[serde(default = "default_mode")]
    pub mode: SweepMode,
    pub out_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: InitKind,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Lattice spacing factor δ; √(2π/Ω₀) when absent.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Core exponent η of the lattice trial.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Layer exponent β of the giant-vortex trial; 2α + 1 when absent.
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub allow_small_eps: bool,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    /// Checks the configuration and returns the warnings it deserves.
    pub fn validate(&self) -> Result<Vec<String>> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.eps_list.is_empty() {
            return bad("eps_list is empty".into());
        }
        if self.eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return bad(format!("every eps must lie in (0, 1): {:?}", self.eps_list));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return bad(format!(
                "eps_list must be strictly decreasing: {:?}",
                self.eps_list
            ));
        }
        let mut warnings = Vec::new();
        let smallest = *self.eps_list.last().expect("nonempty");
        if smallest < EPS_FLOOR {
            if !self.allow_small_eps {
                return bad(format!(
                    "eps = {smallest} is below the floor {EPS_FLOOR}; set allow_small_eps = true to override"
                ));
            }
            warnings.push(format!(
                "eps = {smallest} is below {EPS_FLOOR}; check that nr = {} resolves the healing length",
                self.nr
            ));
        }
        if !(self.omega.is_finite() && self.omega >= 0.0) {
            return bad(format!(
                "omega must be finite and nonnegative, got {}",
                self.omega
            ));
        }
        match self.regime {
            RegimeKind::Fast => match self.alpha {
                Some(a) if a > 0.0 => {}
                _ => return bad("fast regime needs alpha > 0".into()),
            },
            _ if self.alpha.is_some() => {
                return bad("alpha is only meaningful in the fast regime".into());
            }
            _ => {}
        }
        if self.regime != RegimeKind::Constant && !(self.omega > 0.0) {
            return bad("fixed and fast regimes need omega > 0".into());
        }
        GridSpec::new(self.nr, self.ntheta, self.bc)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.minimize_options(0)
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(warnings)
    }

    /// TF parameters at one ε. The constant regime is the fixed regime with
    /// Ω₀ = εΩ.
    pub fn tf_params(&self, eps: f64) -> TfRegimeParams {
        match self.regime {
            RegimeKind::Fixed => TfRegimeParams::Fixed { omega0: self.omega },
            RegimeKind::Constant => TfRegimeParams::Fixed {
                omega0: eps * self.omega,
            },
            RegimeKind::Fast => TfRegimeParams::Fast {
                omega1: self.omega,
                alpha: self.alpha.unwrap_or(1.0),
                eps,
            },
        }
    }

    pub fn angular_velocity(&self, eps: f64) -> f64 {
        match self.regime {
            RegimeKind::Fixed => self.omega / eps,
            RegimeKind::Constant => self.omega,
            RegimeKind::Fast => self.omega / eps.powf(1.0 + self.alpha.unwrap_or(1.0)),
        }
    }

    fn minimize_options(&self, index: usize) -> MinimizeOptions {
        let d = MinimizeOptions::default();
        MinimizeOptions {
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            tol: self.tol.unwrap_or(d.tol),
            seed: self.seed.wrapping_add(index as u64),
            ..d
        }
    }

    fn trial_spec(&self, eps: f64) -> Option<TrialSpec> {
        match self.regime {
            RegimeKind::Fixed => {
                let mut s = TrialSpec::lattice(self.omega, eps);
                if let TrialFamily::Lattice { delta, eta, .. } = &mut s.family {
                    *delta = self.delta.unwrap_or(*delta);
                    *eta = self.eta.unwrap_or(*eta);
                }
                Some(s)
            }
            RegimeKind::Fast => {
                let mut s = TrialSpec::giant(self.omega, self.alpha.unwrap_or(1.0), eps);
                if let TrialFamily::GiantVortex { beta, .. } = &mut s.family {
                    *beta = self.beta.unwrap_or(*beta);
                }
                Some(s)
            }
            RegimeKind::Constant if self.omega > 0.0 => {
                Some(TrialSpec::lattice(eps * self.omega, eps))
            }
            RegimeKind::Constant => None,
        }
    }
}

/// Ratio of |ψ|² below which the phase is not trusted when counting vortices,
/// relative to the largest ring-averaged density.
const BULK_FRACTION: f64 = 0.05;

/// Densities below this fraction of the peak are treated as numerical zero
/// in the hole fit.
const DENSITY_FLOOR: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleReport {
    pub r0: f64,
    /// R₀ − ε^{1/3}, the radius of T_ε.
    pub t_radius: f64,
    /// sup of |ψ|² over T_ε.
    pub max_density: f64,
    /// Slope of log|ψ|² against dist(r, ∂T_ε)²/ε^{2/3}.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub fit_points: usize,
    pub peak_density: f64,
    /// Largest |ψ|² on the innermost ring over the peak density.
    pub center_ratio: f64,
    /// First radius where the ring-averaged density reaches 10% of its maximum.
    pub hole_extent: f64,
}

/// Density in and around the central hole of a fixed-regime state.
pub fn hole_report(field: &WaveField, eps: f64, omega0: f64) -> Result<HoleReport> {
    if !(omega0 > HOLE_THRESHOLD) {
        return Err(Error::NoHole { omega0 });
    }
    let r0 = tf_solve(TfRegimeParams::Fixed { omega0 })?
        .hole_radius
        .expect("hole above threshold");
    let g = &field.grid;
    let t_radius = r0 - eps.cbrt();
    let ring_max: Vec<f64> = (0..g.n_r)
        .map(|j| {
            field
                .ring(j)
                .iter()
                .map(|z| z.norm_sqr())
                .fold(0.0, f64::max)
        })
        .collect();
    let ring_mean: Vec<f64> = (0..g.n_r)
        .map(|j| field.ring(j).iter().map(|z| z.norm_sqr()).sum::<f64>() / g.n_theta as f64)
        .collect();
    let peak = ring_max.iter().cloned().fold(0.0, f64::max);
    let mean_peak = ring_mean.iter().cloned().fold(0.0, f64::max);
    let inside: Vec<usize> = (0..g.n_r).filter(|&j| g.r_nodes[j] <= t_radius).collect();
    let max_density = inside.iter().map(|&j| ring_max[j]).fold(0.0, f64::max);
    let scale = eps.powf(2.0 / 3.0);
    let pts: Vec<(f64, f64)> = inside
        .iter()
        .filter(|&&j| ring_max[j] > DENSITY_FLOOR * peak)
        .map(|&j| ((t_radius - g.r_nodes[j]).powi(2) / scale, ring_max[j].ln()))
        .collect();
    let (slope, intercept) = match line_fit(&pts) {
        Some((s, c)) => (Some(s), Some(c)),
        None => (None, None),
    };
    let hole_extent = (0..g.n_r)
        .find(|&j| ring_mean[j] >= 0.1 * mean_peak)
        .map(|j| g.r_nodes[j])
        .unwrap_or(1.0);
    Ok(HoleReport {
        r0,
        t_radius,
        max_density,
        slope,
        intercept,
        fit_points: pts.len(),
        peak_density: peak,
        center_ratio: if peak > 0.0 { ring_max[0] / peak } else { 0.0 },
        hole_extent,
    })
}

/// Least-squares line y = s x + c, or None with fewer than two distinct x.
fn line_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let s = sxy / sxx;
    Some((s, my - s * mx))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMass {
    /// Radius of the inner disc the mass is measured on.
    pub radius: f64,
    pub interior_mass: f64,
    /// ε^α + ε^{2−α}|log ε| for α < 2, ε^{2−β}|log ε| otherwise.
    pub bound_scale: f64,
}

/// L² mass of a fast-regime state inside R_ε (α < 2) or inside
/// √(1 − ε^β) with 1 ≤ β < 2 (α ≥ 2).
pub fn boundary_mass_report(
    field: &WaveField,
    eps: f64,
    omega1: f64,
    alpha: f64,
    beta: Option<f64>,
) -> Result<BoundaryMass> {
    let lg = eps.ln().abs();
    let (radius, bound_scale) = if alpha < 2.0 {
        let tf = tf_solve(TfRegimeParams::Fast { omega1, alpha, eps })?;
        (
            tf.support_inner_radius(),
            eps.powf(alpha) + eps.powf(2.0 - alpha) * lg,
        )
    } else {
        let b = beta.unwrap_or(1.5);
        if !(1.0..2.0).contains(&b) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in [1, 2) for alpha >= 2, got {b}"
            )));
        }
        ((1.0 - eps.powf(b)).sqrt(), eps.powf(2.0 - b) * lg)
    };
    let g = &field.grid;
    let interior_mass = (0..g.n_r)
        .filter(|&j| g.r_nodes[j] < radius)
        .map(|j| g.weight(j) * field.ring(j).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    Ok(BoundaryMass {
        radius,
        interior_mass,
        bound_scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "exponent", rename_all = "snake_case")]
pub enum RemainderModel {
    /// ε|log ε|
    EpsLogEps,
    /// ε^p
    EpsPow(f64),
    /// ε²|log ε|
    Eps2LogEps,
}

impl RemainderModel {
    pub fn eval(&self, eps: f64) -> f64 {
        match *self {
            RemainderModel::EpsLogEps => eps * eps.ln().abs(),
            RemainderModel::EpsPow(p) => eps.powf(p),
            RemainderModel::Eps2LogEps => eps * eps * eps.ln().abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderFit {
    pub k: f64,
    /// ‖y − K·model‖/‖y‖.
    pub goodness: f64,
}

/// Least-squares fit of residual ≈ K·model(ε) through (ε, residual) points.
pub fn fit_remainder(points: &[(f64, f64)], model: RemainderModel) -> Result<RemainderFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    let x: Vec<f64> = points.iter().map(|p| model.eval(p.0)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let k = dot(&x, &y) / dot(&x, &x);
    Ok(RemainderFit {
        k,
        goodness: misfit(&y, &[(k, &x)]),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedFit {
    pub k: [f64; 2],
    pub goodness: f64,
}

/// Nonnegative least-squares fit of residual ≈ K₁·m₁(ε) + K₂·m₂(ε).
pub fn fit_mixed_remainder(points: &[(f64, f64)], models: [RemainderModel; 2]) -> Result<MixedFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: points.len(),
        });
    }
    let a: Vec<f64> = points.iter().map(|p| models[0].eval(p.0)).collect();
    let b: Vec<f64> = points.iter().map(|p| models[1].eval(p.0)).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let (aa, ab, bb, ay, by) = (
        dot(&a, &a),
        dot(&a, &b),
        dot(&b, &b),
        dot(&a, &y),
        dot(&b, &y),
    );
    let mut candidates = vec![[(ay / aa).max(0.0), 0.0], [0.0, (by / bb).max(0.0)]];
    let det = aa * bb - ab * ab;
    if det > 1e-14 * aa * bb {
        let k = [(ay * bb - by * ab) / det, (by * aa - ay * ab) / det];
        if k[0] >= 0.0 && k[1] >= 0.0 {
            candidates.push(k);
        }
    }
    let (k, goodness) = candidates
        .into_iter()
        .map(|k| (k, misfit(&y, &[(k[0], &a), (k[1], &b)])))
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("candidates are nonempty");
    Ok(MixedFit { k, goodness })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn misfit(y: &[f64], terms: &[(f64, &Vec<f64>)]) -> f64 {
    let r: f64 = y
        .iter()
        .enumerate()
        .map(|(i, yi)| (yi - terms.iter().map(|(k, x)| k * x[i]).sum::<f64>()).powi(2))
        .sum();
    (r / dot(y, y)).sqrt()
}

/// Diagnostics of one state (trial or minimized).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub energy: f64,
    pub energy_magnetic: f64,
    /// |E_L − E_mag| / max(|E_L|, 1).
    pub form_agreement: f64,
    /// Energy on the TF scale (ε²E or ε^{2+2α}E).
    pub scaled_energy: f64,
    /// scaled_energy − E^TF.
    pub residual: f64,
    pub tf_lower_bound_ok: bool,
    pub gradient_residual: f64,
    pub anisotropy: f64,
    pub vortex_count: usize,
    pub net_charge: i64,
    /// ‖|ψ|² − 1/π‖₁.
    pub uniform_l1: f64,
    pub interior_mass: Option<BoundaryMass>,
    pub hole: Option<HoleReport>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub stalled: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInputs {
    pub eps: f64,
    pub omega_eff: f64,
    pub regime: RegimeKind,
    pub omega: f64,
    pub alpha: Option<f64>,
    pub tf_params: TfRegimeParams,
    pub trial: Option<TrialSpec>,
    pub nr: usize,
    pub ntheta: usize,
    pub bc: BoundaryCondition,
    pub mode: SweepMode,
    pub init: InitKind,
    pub seed: u64,
    pub minimize: Option<MinimizeOptions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub code_version: String,
    pub inputs: RunInputs,
    pub tf_energy: f64,
    pub hole_radius: Option<f64>,
    pub boundary_radius: Option<f64>,
    /// Minimum of the reduced giant-vortex functional (fast regime).
    pub giant_vortex_energy: Option<f64>,
    pub winding: Option<i64>,
    pub lattice_sites: Option<usize>,
    pub lattice_degenerate: Option<bool>,
    pub trial: Option<StateRecord>,
    pub minimized: Option<StateRecord>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
    pub started_unix: f64,
    pub elapsed_seconds: f64,
}

impl RunRecord {
    /// The state later columns describe: the minimizer if present.
    pub fn final_state(&self) -> Option<&StateRecord> {
        self.minimized.as_ref().or(self.trial.as_ref())
    }
}

fn state_record(
    cfg: &SweepConfig,
    eps: f64,
    tf: &TfSolution,
    field: &WaveField,
) -> Result<StateRecord> {
    let omega = cfg.angular_velocity(eps);
    let op = DiscOperator::new(&field.grid);
    crate::field::energy_check_normalized(field)?;
    let el = op
        .energy(field, omega, eps, EnergyForm::AngularMomentum)
        .total;
    let em = op.energy(field, omega, eps, EnergyForm::Magnetic).total;
    let params = cfg.tf_params(eps);
    let scaled = params.gp_energy_scale(eps) * el;
    let residual = scaled - tf.energy;
    let vortices = bulk_vortices(field);
    let interior_mass = match params {
        TfRegimeParams::Fast { omega1, alpha, eps } => {
            Some(boundary_mass_report(field, eps, omega1, alpha, None)?)
        }
        _ => None,
    };
    let hole = match (cfg.regime, params) {
        (RegimeKind::Fixed, TfRegimeParams::Fixed { omega0 }) if omega0 > HOLE_THRESHOLD => {
            Some(hole_report(field, eps, omega0)?)
        }
        _ => None,
    };
    Ok(StateRecord {
        energy: el,
        energy_magnetic: em,
        form_agreement: (el - em).abs() / el.abs().max(1.0),
        scaled_energy: scaled,
        residual,
        tf_lower_bound_ok: residual >= -1e-9 * tf.energy.abs().max(1.0),
        gradient_residual: residual_norm(field, omega, eps),
        anisotropy: anisotropy_index(field),
        vortex_count: vortices.len(),
        net_charge: vortices.iter().map(|v| v.charge).sum(),
        uniform_l1: uniform_density_distance(field),
        interior_mass,
        hole,
        iterations: None,
        converged: None,
        stalled: None,
    })
}

/// Vortices detected where the ring-averaged density is at least
/// [`BULK_FRACTION`] of its maximum, so that the phase is meaningful.
fn bulk_vortices(field: &WaveField) -> Vec<crate::field::Vortex> {
    let g = &field.grid;
    let mean: Vec<f64> = (0..g.n_r)
        .map(|j| field.ring(j).iter().map(|z| z.norm_sqr()).sum::<f64>() / g.n_theta as f64)
        .collect();
    let top = mean.iter().cloned().fold(0.0, f64::max);
    let threshold = (0.5 * top).sqrt();
    detect_vortices(field, threshold)
        .into_iter()
        .filter(|v| {
            let r = v.x.hypot(v.y);
            let j = ((r / g.dr()).floor() as usize).min(g.n_r - 1);
            mean[j] >= BULK_FRACTION * top
        })
        .collect()
}

fn now_unix() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// One ε of a sweep; failures are recorded rather than returned.
pub fn run_single(cfg: &SweepConfig, index: usize) -> RunRecord {
    run_single_with(cfg, index, None).0
}

/// [`run_single`] with an optional initial state for the minimizer, also
/// returning the final field (minimized if present, else the trial).
pub fn run_single_with(
    cfg: &SweepConfig,
    index: usize,
    init: Option<WaveField>,
) -> (RunRecord, Option<WaveField>) {
    let eps = cfg.eps_list[index];
    let started_unix = now_unix();
    let clock = Instant::now();
    let trial = cfg.trial_spec(eps);
    let wants_min = cfg.mode != SweepMode::TrialOnly;
    let opts = cfg.minimize_options(index);
    let mut rec = RunRecord {
        schema_version: SCHEMA_VERSION,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: RunInputs {
            eps,
            omega_eff: cfg.angular_velocity(eps),
            regime: cfg.regime,
            omega: cfg.omega,
            alpha: cfg.alpha,
            tf_params: cfg.tf_params(eps),
            trial,
            nr: cfg.nr,
            ntheta: cfg.ntheta,
            bc: cfg.bc,
            mode: cfg.mode,
            init: cfg.init,
            seed: cfg.seed,
            minimize: wants_min.then_some(opts),
        },
        tf_energy: f64::NAN,
        hole_radius: None,
        boundary_radius: None,
        giant_vortex_energy: None,
        winding: None,
        lattice_sites: None,
        lattice_degenerate: None,
        trial: None,
        minimized: None,
        warnings: Vec::new(),
        error: None,
        started_unix,
        elapsed_seconds: 0.0,
    };
    let field = match fill_run(cfg, &mut rec, init) {
        Ok(f) => Some(f),
        Err(e) => {
            rec.error = Some(e.to_string());
            None
        }
    };
    rec.elapsed_seconds = clock.elapsed().as_secs_f64();
    (rec, field)
}

fn fill_run(cfg: &SweepConfig, rec: &mut RunRecord, init: Option<WaveField>) -> Result<WaveField> {
    let eps = rec.inputs.eps;
    let params = rec.inputs.tf_params;
    let tf = tf_solve(params)?;
    rec.tf_energy = tf.energy;
    rec.hole_radius = tf.hole_radius;
    rec.boundary_radius = tf.boundary_radius;
    if let TfRegimeParams::Fast { omega1, alpha, eps } = params {
        rec.giant_vortex_energy = Some(giant_vortex_energy(omega1, alpha, eps)?.energy);
    }
    let grid = GridSpec::new(cfg.nr, cfg.ntheta, cfg.bc)?;
    let trial_field = match rec.inputs.trial {
        Some(spec) => {
            let t = match spec.family {
                TrialFamily::Lattice { .. } => build_lattice_trial(&spec, &grid)?,
                TrialFamily::GiantVortex { .. } => build_giant_vortex_trial(&spec, &grid)?,
            };
            rec.winding = t.winding;
            rec.lattice_sites = t.lattice.as_ref().map(|l| l.count);
            if matches!(spec.family, TrialFamily::Lattice { .. }) {
                rec.lattice_degenerate = Some(t.lattice_degenerate);
            }
            rec.warnings.extend(t.warnings);
            t.field
        }
        None => normalize(&WaveField::constant(&grid, Complex64::new(1.0, 0.0)))?,
    };
    if cfg.mode != SweepMode::Minimize {
        rec.trial = Some(state_record(cfg, eps, &tf, &trial_field)?);
    }
    let Some(opts) = rec.inputs.minimize else {
        return Ok(trial_field);
    };
    let init = match (init, cfg.init) {
        (Some(f), _) => {
            if f.grid != grid {
                return Err(Error::InvalidParameter(format!(
                    "initial field is {}x{}, run grid is {}x{}",
                    f.grid.n_r, f.grid.n_theta, grid.n_r, grid.n_theta
                )));
            }
            f
        }
        (None, InitKind::Trial) => trial_field,
        (None, InitKind::Random) => random_initial(&grid, opts.seed),
    };
    {
        let r = minimize(&init, rec.inputs.omega_eff, eps, &opts)?;
        let mut s = state_record(cfg, eps, &tf, &r.field)?;
        s.iterations = Some(r.iterations);
        s.converged = Some(r.converged);
        s.stalled = Some(r.stalled);
        if !r.converged {
            rec.warnings.push(format!(
                "minimizer stopped at residual {:e} after {} iterations",
                r.residual, r.iterations
            ));
        }
        rec.minimized = Some(s);
        Ok(r.field)
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// The sweep table; one row per record, in the given order.
pub fn sweep_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fin = r.final_state();
        let row = [
            format!("{:e}", r.inputs.eps),
            format!("{:e}", r.inputs.omega_eff),
            fmt_opt(r.trial.as_ref().map(|s| s.energy)),
            fmt_opt(r.minimized.as_ref().map(|s| s.energy)),
            fmt_opt(Some(r.tf_energy).filter(|e| e.is_finite())),
            fmt_opt(r.trial.as_ref().map(|s| s.residual)),
            fmt_opt(r.minimized.as_ref().map(|s| s.residual)),
            fmt_opt(fin.map(|s| s.anisotropy)),
            fin.map(|s| s.vortex_count.to_string()).unwrap_or_default(),
            fmt_opt(fin.and_then(|s| s.interior_mass).map(|m| m.interior_mass)),
            fmt_opt(fin.and_then(|s| s.hole).map(|h| h.max_density)),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn record_path(dir: &Path, index: usize, eps: f64) -> PathBuf {
    dir.join(format!("run_{index:03}_eps_{eps}.json"))
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub csv_path: PathBuf,
    pub warnings: Vec<String>,
}

impl SweepOutcome {
    /// True when no run failed (converged or not).
    pub fn all_completed(&self) -> bool {
        self.records.iter().all(|r| r.error.is_none())
    }
}

/// Runs every ε concurrently, writes one JSON record per run and the CSV
/// table `sweep.csv` into the output directory.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    let warnings = cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let records: Vec<RunRecord> = (0..cfg.eps_list.len())
        .into_par_iter()
        .map(|i| {
            let rec = run_single(cfg, i);
            let path = record_path(&cfg.out_dir, i, rec.inputs.eps);
            serde_json::to_vec_pretty(&rec)
                .map_err(Error::from)
                .and_then(|bytes| write_atomic(&path, &bytes))
                .map(|_| rec)
        })
        .collect::<Result<_>>()?;
    let csv_path = cfg.out_dir.join("sweep.csv");
    write_atomic(&csv_path, sweep_csv(&records).as_bytes())?;
    Ok(SweepOutcome {
        records,
        csv_path,
        warnings,
    })
}

/// (ε, residual) pairs of the trial or minimized states of a sweep.
pub fn residual_points(records: &[RunRecord], minimized: bool) -> Vec<(f64, f64)> {
    records
        .iter()
        .filter_map(|r| {
            let s = if minimized {
                r.minimized.as_ref()
            } else {
                r.trial.as_ref()
            };
            s.map(|s| (r.inputs.eps, s.residual))
        })
        .collect()
}

/// ‖|ψ|² − 1/π‖₁, the distance to the uniform density.
pub fn uniform_density_distance(field: &WaveField) -> f64 {
    crate::field::l1_density_distance(field, |_| 1.0 / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(dir: &Path) -> SweepConfig {
        SweepConfig {
            regime: RegimeKind::Fixed,
            omega: 4.0,
            alpha: None,
            eps_list: vec![0.2, 0.1],
            nr: 32,
            ntheta: 64,
            bc: BoundaryCondition::Neumann,
            mode: SweepMode::TrialOnly,
            out_dir: dir.to_path_buf(),
            seed: 3,
            init: InitKind::Trial,
            max_iters: Some(20),
            tol: None,
            delta: None,
            eta: None,
            beta: None,
            allow_small_eps: false,
        }
    }

    #[test]
    fn parses_flat_toml() {
        let cfg = SweepConfig::from_toml(
            r#"
            regime = "fast"
            omega = 1.0
            alpha = 1.0
            eps_list = [0.1, 0.05]
            nr = 64
            ntheta = 512
            bc = "dirichlet"
            mode = "trial_only"
            out_dir = "out"
            seed = 5
            "#,
        )
        .unwrap();
        assert_eq!(cfg.regime, RegimeKind::Fast);
        assert_eq!(cfg.bc, BoundaryCondition::Dirichlet);
        assert_eq!(cfg.mode, SweepMode::TrialOnly);
        assert!((cfg.angular_velocity(0.1) - 100.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_configs() {
        let d = tempfile::tempdir().unwrap();
        let mut c = base(d.path());
        c.eps_list.clear();
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let mut c = base(d.path());
        c.eps_list = vec![0.05, 0.1];
        assert!(c.validate().is_err());
        let mut c = base(d.path());
        c.eps_list = vec![0.1, 0.01];
        assert!(c.validate().is_err());
        c.allow_small_eps = true;
        assert_eq!(c.validate().unwrap().len(), 1);
        let mut c = base(d.path());
        c.regime = RegimeKind::Fast;
        assert!(c.validate().is_err());
        assert!(SweepConfig::from_toml("regime = \"fixed\"\nomega = 1.0\nbogus = 1\n").is_err());
    }

    #[test]
    fn fit_recovers_exact_model() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&e| (e, 2.0 * e * f64::ln(1.0 / e)))
            .collect();
        let f = fit_remainder(&pts, RemainderModel::EpsLogEps).unwrap();
        assert!((f.k - 2.0).abs() < 1e-12);
        assert!(f.goodness < 1e-10);
        let sq: Vec<(f64, f64)> = [0.5, 0.1, 0.02].iter().map(|&e| (e, e * e)).collect();
        let f = fit_remainder(&sq, RemainderModel::EpsLogEps).unwrap();
        assert!(f.goodness > 0.1);
        assert!(matches!(
            fit_remainder(&pts[..2], RemainderModel::EpsLogEps),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        ));
    }

    #[test]
    fn mixed_fit_is_nonnegative() {
        let m = [RemainderModel::EpsPow(2.0), RemainderModel::Eps2LogEps];
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.02]
            .iter()
            .map(|&e| (e, 0.5 * m[0].eval(e) + 3.0 * m[1].eval(e)))
            .collect();
        let f = fit_mixed_remainder(&pts, m).unwrap();
        assert!((f.k[0] - 0.5).abs() < 1e-8 && (f.k[1] - 3.0).abs() < 1e-8);
        // data that would need a negative coefficient is clamped
        let neg: Vec<(f64, f64)> = [0.1, 0.05, 0.02]
            .iter()
            .map(|&e| (e, m[0].eval(e) - 0.2 * m[1].eval(e)))
            .collect();
        let f = fit_mixed_remainder(&neg, m).unwrap();
        assert!(f.k[0] >= 0.0 && f.k[1] >= 0.0);
        assert!(f.goodness > 0.0);
    }

    #[test]
    fn hole_report_recovers_planted_slope() {
        let g = GridSpec::new(256, 16, BoundaryCondition::Neumann).unwrap();
        let (eps, omega0): (f64, f64) = (0.05, 8.0);
        let r0 = tf_solve(TfRegimeParams::Fixed { omega0 })
            .unwrap()
            .hole_radius
            .unwrap();
        let rt = r0 - eps.cbrt();
        let s = eps.powf(2.0 / 3.0);
        let f = WaveField::from_fn(&g, |r, _| {
            let d = if r < rt { (rt - r).powi(2) / s } else { 0.0 };
            Complex64::new(
                (0.3 * (-2.5 * d).exp() * (-1.7 * d).exp()).sqrt() * if r < r0 { 1.0 } else { 3.0 },
                0.0,
            )
        });
        let h = hole_report(&f, eps, omega0).unwrap();
        assert!((h.slope.unwrap() + 4.2).abs() < 1e-9);
        assert!((h.intercept.unwrap() - 0.3f64.ln()).abs() < 1e-9);
        assert!(h.max_density <= 0.3 && h.max_density > 0.29);
        assert!(matches!(
            hole_report(&f, eps, 1.0),
            Err(Error::NoHole { .. })
        ));
    }

    #[test]
    fn interior_mass_of_tf_modulus_vanishes() {
        let g = GridSpec::new(256, 16, BoundaryCondition::Neumann).unwrap();
        let (eps, omega1, alpha) = (0.05, 1.0, 1.0);
        let tf = tf_solve(TfRegimeParams::Fast { omega1, alpha, eps }).unwrap();
        let f = normalize(&WaveField::from_fn(&g, |r, _| {
            Complex64::new(tf.density(r).sqrt(), 0.0)
        }))
        .unwrap();
        let m = boundary_mass_report(&f, eps, omega1, alpha, None).unwrap();
        assert_eq!(m.interior_mass, 0.0);
        let c = normalize(&WaveField::constant(&g, Complex64::new(1.0, 0.0))).unwrap();
        let m = boundary_mass_report(&c, eps, omega1, alpha, None).unwrap();
        // the uniform density puts mass R² inside radius R, up to one cell
        assert!((m.interior_mass - m.radius * m.radius).abs() < 2.0 * g.dr());
        assert!(boundary_mass_report(&c, eps, omega1, 2.5, Some(2.0)).is_err());
    }

    #[test]
    fn sweep_writes_records_and_table() {
        let d = tempfile::tempdir().unwrap();
        let cfg = base(d.path());
        let out = run_sweep(&cfg).unwrap();
        assert!(
            out.all_completed(),
            "{:?}",
            out.records.iter().map(|r| &r.error).collect::<Vec<_>>()
        );
        let csv = fs::read_to_string(&out.csv_path).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("2e-1,"));
        for (i, r) in out.records.iter().enumerate() {
            let text = fs::read_to_string(record_path(d.path(), i, r.inputs.eps)).unwrap();
            let back: RunRecord = serde_json::from_str(&text).unwrap();
            assert_eq!(back.schema_version, SCHEMA_VERSION);
            let t = back.trial.unwrap();
            assert!(t.tf_lower_bound_ok);
            assert!(t.form_agreement < 1e-10);
        }
    }

    #[test]
    fn failures_are_recorded_and_the_sweep_continues() {
        let d = tempfile::tempdir().unwrap();
        let mut cfg = base(d.path());
        cfg.regime = RegimeKind::Fast;
        cfg.omega = 1.0;
        cfg.alpha = Some(1.0);
        cfg.eps_list = vec![0.3, 0.1];
        // winding 50 does not fit into 64 angular nodes
        let out = run_sweep(&cfg).unwrap();
        assert!(out.records[0].error.is_none());
        assert!(out.records[1].error.as_deref().unwrap().contains("winding"));
        assert!(!out.all_completed());
        assert_eq!(
            fs::read_to_string(&out.csv_path).unwrap().lines().count(),
            3
        );
    }
}

//! Trial states for the upper bounds: a square lattice of unit vortices on the
//! TF profile, and a giant vortex on the fast-rotation boundary layer.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{normalize, pairwise_sum, GridSpec, WaveField};
use crate::quadrature::{breakpoints, integrate_adaptive};
use crate::tf::{tf_solve, TfRegimeParams, TfSolution};

/// Square lattice of spacing ℓ = δ√ε clipped to |r| ≤ 1 − 2√2ℓ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexLattice {
    pub spacing: f64,
    pub delta: f64,
    /// Points in lexicographic (m, n) order.
    pub points: Vec<[f64; 2]>,
    pub count: usize,
}

impl VortexLattice {
    /// A lattice with explicitly given sites, e.g. a single vortex.
    pub fn from_points(points: Vec<[f64; 2]>, spacing: f64, delta: f64) -> Self {
        let count = points.len();
        VortexLattice {
            spacing,
            delta,
            points,
            count,
        }
    }

    /// Radius of the disc that holds all sites.
    pub fn radius_limit(&self) -> f64 {
        1.0 - 2.0 * 2f64.sqrt() * self.spacing
    }

    /// Continuum estimate π(1 − 2√2ℓ)²/ℓ² of the number of sites.
    pub fn expected_count(&self) -> f64 {
        PI * self.radius_limit().powi(2) / self.spacing.powi(2)
    }

    /// The site nearest to `p` if `p` lies within half a spacing of one.
    fn nearest_site(&self, p: [f64; 2]) -> Option<[f64; 2]> {
        let l = self.spacing;
        let site = [(p[0] / l).round() * l, (p[1] / l).round() * l];
        let lim = self.radius_limit();
        (site[0].hypot(site[1]) <= lim + 1e-12 * l).then_some(site)
    }
}

pub fn build_lattice(eps: f64, delta: f64) -> Result<VortexLattice> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < eps < 1 and delta > 0, got eps = {eps}, delta = {delta}"
        )));
    }
    let spacing = delta * eps.sqrt();
    let lim = 1.0 - 2.0 * 2f64.sqrt() * spacing;
    if lim <= 0.0 {
        return Err(Error::DegenerateLattice { spacing });
    }
    let m_max = (lim / spacing).floor() as i64;
    let mut points = Vec::new();
    for m in -m_max..=m_max {
        for n in -m_max..=m_max {
            let p = [m as f64 * spacing, n as f64 * spacing];
            if p[0].hypot(p[1]) <= lim {
                points.push(p);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::DegenerateLattice { spacing });
    }
    Ok(VortexLattice::from_points(points, spacing, delta))
}

/// g(z) = ∏ (z − z_i)/|z − z_i|, accumulated as a sum of angles in lattice
/// order so the modulus is exactly that of a single `from_polar`.
pub fn lattice_phase(point: [f64; 2], lattice: &VortexLattice) -> Result<Complex64> {
    let mut angle = 0.0;
    for p in &lattice.points {
        let dx = point[0] - p[0];
        let dy = point[1] - p[1];
        if dx == 0.0 && dy == 0.0 {
            return Err(Error::SingularPoint { x: p[0], y: p[1] });
        }
        angle += dy.atan2(dx);
    }
    Ok(Complex64::from_polar(1.0, angle))
}

/// ∇ arg g at `point`: Σ (−(y − y_i), x − x_i)/|r − r_i|².
pub fn lattice_phase_gradient(point: [f64; 2], lattice: &VortexLattice) -> [f64; 2] {
    let mut g = [0.0, 0.0];
    for p in &lattice.points {
        let dx = point[0] - p[0];
        let dy = point[1] - p[1];
        let d2 = dx * dx + dy * dy;
        g[0] -= dy / d2;
        g[1] += dx / d2;
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TrialFamily {
    Lattice { omega0: f64, delta: f64, eta: f64 },
    GiantVortex { omega1: f64, alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialSpec {
    pub family: TrialFamily,
    pub eps: f64,
}

impl TrialSpec {
    /// Lattice trial with δ = √(2π/Ω₀) and η = 3.
    pub fn lattice(omega0: f64, eps: f64) -> Self {
        TrialSpec {
            family: TrialFamily::Lattice {
                omega0,
                delta: (2.0 * PI / omega0).sqrt(),
                eta: 3.0,
            },
            eps,
        }
    }

    /// Giant-vortex trial with β = 2α + 1.
    pub fn giant(omega1: f64, alpha: f64, eps: f64) -> Self {
        TrialSpec {
            family: TrialFamily::GiantVortex {
                omega1,
                alpha,
                beta: 2.0 * alpha + 1.0,
            },
            eps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        match self.family {
            TrialFamily::Lattice { omega0, delta, eta } => {
                if !(eta > 2.5) {
                    return Err(Error::InvalidParameter(format!(
                        "eta must exceed 5/2, got {eta}"
                    )));
                }
                if !(delta > 0.0) || !(omega0 > 0.0) {
                    return Err(Error::InvalidParameter(
                        "delta and omega0 must be positive".into(),
                    ));
                }
            }
            TrialFamily::GiantVortex {
                omega1,
                alpha,
                beta,
            } => {
                if !(alpha > 0.0) || !(omega1 > 0.0) {
                    return Err(Error::InvalidParameter(
                        "alpha and omega1 must be positive".into(),
                    ));
                }
                if !(beta > 2.0 * alpha) {
                    return Err(Error::InvalidParameter(format!(
                        "beta must exceed 2 alpha, got beta = {beta}, alpha = {alpha}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn tf_params(&self) -> TfRegimeParams {
        match self.family {
            TrialFamily::Lattice { omega0, .. } => TfRegimeParams::Fixed { omega0 },
            TrialFamily::GiantVortex { omega1, alpha, .. } => TfRegimeParams::Fast {
                omega1,
                alpha,
                eps: self.eps,
            },
        }
    }

    /// Angular velocity Ω(ε) of the GP functional this trial is meant for.
    pub fn angular_velocity(&self) -> f64 {
        self.tf_params()
            .angular_velocity(self.eps)
            .expect("tf_params carries the same eps")
    }
}

/// A sampled trial state and the data of its construction.
#[derive(Debug, Clone)]
pub struct TrialField {
    pub field: WaveField,
    /// Continuum normalization constant c² (c̃² for the giant vortex).
    pub norm_constant_sq: f64,
    pub winding: Option<i64>,
    pub lattice: Option<VortexLattice>,
    /// Set when the lattice spacing admits no site and the trial was built
    /// without vortices.
    pub lattice_degenerate: bool,
    pub warnings: Vec<String>,
}

/// Integer part that tolerates binary rounding just below an integer,
/// e.g. 1/(2·0.1²) = 49.999… is taken as 50.
pub fn integer_part(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r as i64
    } else {
        x.floor() as i64
    }
}

/// Cut-off (r − R₀)/ε clamped to [0, 1].
fn hole_cutoff(r: f64, r0: f64, eps: f64) -> f64 {
    ((r - r0) / eps).clamp(0.0, 1.0)
}

/// Cut-off (r² − R²)/ε^β clamped to [0, 1].
fn layer_cutoff(r: f64, r_in: f64, width: f64) -> f64 {
    ((r * r - r_in * r_in) / width).clamp(0.0, 1.0)
}

/// Radial profile f_ε of the lattice trial.
pub fn lattice_radial_profile(tf: &TfSolution, eps: f64) -> impl Fn(f64) -> f64 + '_ {
    move |r| {
        let base = tf.density(r).sqrt();
        match tf.hole_radius {
            Some(r0) => hole_cutoff(r, r0, eps) * base,
            None => base,
        }
    }
}

pub fn build_lattice_trial(spec: &TrialSpec, grid: &GridSpec) -> Result<TrialField> {
    spec.validate()?;
    let TrialFamily::Lattice { delta, eta, .. } = spec.family else {
        return Err(Error::RegimeMismatch(
            "lattice trial needs a lattice trial spec".into(),
        ));
    };
    let eps = spec.eps;
    let tf = tf_solve(spec.tf_params())?;
    let mut warnings = Vec::new();
    let (lattice, degenerate) = match build_lattice(eps, delta) {
        Ok(l) => (Some(l), false),
        Err(Error::DegenerateLattice { spacing }) => {
            warnings.push(format!(
                "lattice spacing {spacing:.4} admits no site; trial built without vortices"
            ));
            (None, true)
        }
        Err(e) => return Err(e),
    };
    let core = eps.powf(eta);
    if core < grid.dr() && lattice.is_some() {
        warnings.push(format!(
            "vortex core radius {core:.3e} is below the radial spacing {:.3e}",
            grid.dr()
        ));
    }

    let f = lattice_radial_profile(&tf, eps);
    let kinks: Vec<f64> = tf
        .hole_radius
        .map(|r0| vec![r0, r0 + eps])
        .unwrap_or_default();
    let f2 = integrate_adaptive(
        |r| 2.0 * PI * f(r).powi(2) * r,
        &breakpoints(0.0, 1.0, &kinks),
        1e-13,
    )?;
    let core_loss = lattice
        .as_ref()
        .map(|l| {
            let terms: Vec<f64> = l
                .points
                .iter()
                .map(|p| f(p[0].hypot(p[1])).powi(2) * PI * core * core / 2.0)
                .collect();
            pairwise_sum(&terms)
        })
        .unwrap_or(0.0);
    let c_sq = 1.0 / (f2 - core_loss);

    let c = c_sq.sqrt();
    let raw = WaveField::from_fn(grid, |r, t| {
        let p = [r * t.cos(), r * t.sin()];
        let amp = c * f(r);
        match &lattice {
            None => Complex64::new(amp, 0.0),
            Some(l) => {
                let chi = match l.nearest_site(p) {
                    Some(s) => ((p[0] - s[0]).hypot(p[1] - s[1]) / core).min(1.0),
                    None => 1.0,
                };
                if chi == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                lattice_phase(p, l)
                    .map(|g| amp * chi * g)
                    .unwrap_or_default()
            }
        }
    });
    Ok(TrialField {
        field: normalize(&raw)?,
        norm_constant_sq: c_sq,
        winding: lattice.as_ref().map(|l| l.count as i64),
        lattice,
        lattice_degenerate: degenerate,
        warnings,
    })
}

pub fn build_giant_vortex_trial(spec: &TrialSpec, grid: &GridSpec) -> Result<TrialField> {
    spec.validate()?;
    let TrialFamily::GiantVortex {
        omega1,
        alpha,
        beta,
    } = spec.family
    else {
        return Err(Error::RegimeMismatch(
            "giant-vortex trial needs a giant-vortex trial spec".into(),
        ));
    };
    let eps = spec.eps;
    let winding = integer_part(omega1 / (2.0 * eps.powf(1.0 + alpha)));
    if 2 * winding >= grid.n_theta as i64 {
        return Err(Error::WindingAliasing {
            winding,
            n_theta: grid.n_theta,
        });
    }
    let tf = tf_solve(spec.tf_params())?;
    let r_in = tf.support_inner_radius();
    let width = eps.powf(beta);
    let mut warnings = Vec::new();
    if 1.0 - r_in < 2.0 * grid.dr() {
        warnings.push(format!(
            "boundary layer of width {:.3e} spans fewer than two radial cells",
            1.0 - r_in
        ));
    }
    let profile = |r: f64| layer_cutoff(r, r_in, width) * tf.density(r).sqrt();
    let outer = (r_in * r_in + width).sqrt();
    let mass = integrate_adaptive(
        |r| 2.0 * PI * profile(r).powi(2) * r,
        &breakpoints(0.0, 1.0, &[r_in, outer]),
        1e-13,
    )?;
    let c_sq = 1.0 / mass;
    let c = c_sq.sqrt();
    let n = winding as f64;
    let raw = WaveField::from_fn(grid, |r, t| Complex64::from_polar(c * profile(r), n * t));
    Ok(TrialField {
        field: normalize(&raw)?,
        norm_constant_sq: c_sq,
        winding: Some(winding),
        lattice: None,
        lattice_degenerate: false,
        warnings,
    })
}

/// Numerical ∫_Λ |∇g|² against its leading term π³/(2δ⁴ε²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseKineticProbe {
    pub value: f64,
    pub leading: f64,
    /// (value − leading)/(|log ε|/ε).
    pub residual_scaled: f64,
}

/// Integrates |∇g|² over the grid nodes farther than ε^η from every site.
pub fn phase_kinetic_probe(
    lattice: &VortexLattice,
    eta: f64,
    eps: f64,
    grid: &GridSpec,
) -> PhaseKineticProbe {
    let core = eps.powf(eta);
    let rows: Vec<f64> = (0..grid.n_r)
        .map(|j| {
            let terms: Vec<f64> = (0..grid.n_theta)
                .map(|k| {
                    let p = grid.position(j, k);
                    let near = lattice
                        .points
                        .iter()
                        .any(|s| (p[0] - s[0]).hypot(p[1] - s[1]) < core);
                    if near {
                        0.0
                    } else {
                        let g = lattice_phase_gradient(p, lattice);
                        g[0] * g[0] + g[1] * g[1]
                    }
                })
                .collect();
            grid.weight(j) * pairwise_sum(&terms)
        })
        .collect();
    let value = pairwise_sum(&rows);
    let leading = PI.powi(3) / (2.0 * lattice.delta.powi(4) * eps * eps);
    PhaseKineticProbe {
        value,
        leading,
        residual_scaled: (value - leading) / (eps.ln().abs() / eps),
    }
}

/// TF functional of a sampled density measured against the TF energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfEnergyCheck {
    /// Grid quadrature of the TF functional at |ψ|².
    pub functional: f64,
    /// functional − E^TF.
    pub residual: f64,
    /// Minimum of the same discrete functional over normalized nonnegative
    /// grid densities, minus E^TF: the quadrature slack of this grid.
    pub grid_floor_gap: f64,
}

/// Discrete TF functional Σ w (ρ² − Ω₀² r² ρ/4), rescaled by the regime.
pub fn discrete_tf_functional(field: &WaveField, params: TfRegimeParams) -> f64 {
    let w = params.effective_omega0();
    let a = w * w / 4.0;
    let g = &field.grid;
    let rows: Vec<f64> = (0..g.n_r)
        .map(|j| {
            let r2 = g.r_nodes[j].powi(2);
            let terms: Vec<f64> = field
                .ring(j)
                .iter()
                .map(|z| {
                    let p = z.norm_sqr();
                    p * p - a * r2 * p
                })
                .collect();
            g.weight(j) * pairwise_sum(&terms)
        })
        .collect();
    params.energy_scale() * pairwise_sum(&rows)
}

/// Minimum of the discrete TF functional on `grid`: ρ_j = [λ + Ω₀² r_j²/4]₊/2
/// with λ fixed by Σ w ρ = 1.
pub fn discrete_tf_floor(grid: &GridSpec, params: TfRegimeParams) -> f64 {
    let w = params.effective_omega0();
    let a = w * w / 4.0;
    let ring_w: Vec<f64> = (0..grid.n_r)
        .map(|j| grid.weight(j) * grid.n_theta as f64)
        .collect();
    let rho = |lambda: f64, j: usize| ((lambda + a * grid.r_nodes[j].powi(2)) / 2.0).max(0.0);
    let mass = |lambda: f64| -> f64 { (0..grid.n_r).map(|j| ring_w[j] * rho(lambda, j)).sum() };
    let (mut lo, mut hi) = (-a - 1.0, 2.0 / PI + 1.0);
    while mass(hi) < 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let m = mass(lambda);
    let terms: Vec<f64> = (0..grid.n_r)
        .map(|j| {
            let p = rho(lambda, j) / m;
            ring_w[j] * (p * p - a * grid.r_nodes[j].powi(2) * p)
        })
        .collect();
    params.energy_scale() * pairwise_sum(&terms)
}

pub fn trial_tf_energy_check(field: &WaveField, params: TfRegimeParams) -> Result<TfEnergyCheck> {
    let tf = tf_solve(params)?;
    let functional = discrete_tf_functional(field, params);
    Ok(TfEnergyCheck {
        functional,
        residual: functional - tf.energy,
        grid_floor_gap: discrete_tf_floor(&field.grid, params) - tf.energy,
    })
}

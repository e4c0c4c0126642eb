//! Thomas–Fermi limit of the rotating flat-trap problem.
//!
//! In the critical regime Ω = Ω₀/ε the TF functional is
//! `∫ ρ² − Ω₀² r² ρ / 4` over normalized nonnegative densities on the unit
//! disc. The fast regime Ω = Ω₁/ε^{1+α} is the same problem with Ω₀ replaced
//! by Ω₁/ε^α and the energy rescaled by ε^{2α}.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{breakpoints, integrate_adaptive};
use crate::HOLE_THRESHOLD;

/// Rotation regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "regime", rename_all = "snake_case")]
pub enum TfRegimeParams {
    /// Ω = Ω₀/ε.
    Fixed { omega0: f64 },
    /// Ω = Ω₁/ε^{1+α}.
    Fast { omega1: f64, alpha: f64, eps: f64 },
}

impl TfRegimeParams {
    pub fn validate(&self) -> Result<()> {
        match *self {
            TfRegimeParams::Fixed { omega0 } => {
                if !(omega0 > 0.0 && omega0.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "omega0 must be positive, got {omega0}"
                    )));
                }
            }
            TfRegimeParams::Fast { omega1, alpha, eps } => {
                if !(omega1 > 0.0 && omega1.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "omega1 must be positive, got {omega1}"
                    )));
                }
                if !(alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "alpha must be positive, got {alpha}"
                    )));
                }
                if !(eps > 0.0 && eps < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "eps must lie in (0, 1), got {eps}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The Ω₀ that enters the TF density: Ω₀ itself, or Ω₁/ε^α.
    pub fn effective_omega0(&self) -> f64 {
        match *self {
            TfRegimeParams::Fixed { omega0 } => omega0,
            TfRegimeParams::Fast { omega1, alpha, eps } => omega1 / eps.powf(alpha),
        }
    }

    /// Factor multiplying the reduced TF energy: 1, or ε^{2α}.
    pub fn energy_scale(&self) -> f64 {
        match *self {
            TfRegimeParams::Fixed { .. } => 1.0,
            TfRegimeParams::Fast { alpha, eps, .. } => eps.powf(2.0 * alpha),
        }
    }

    /// Angular velocity Ω of the GP functional at coupling `eps`.
    ///
    /// For the fast regime the stored ε must match `eps`.
    pub fn angular_velocity(&self, eps: f64) -> Result<f64> {
        match *self {
            TfRegimeParams::Fixed { omega0 } => Ok(omega0 / eps),
            TfRegimeParams::Fast {
                omega1,
                alpha,
                eps: e,
            } => {
                if (e - eps).abs() > 1e-15 * e.max(eps) {
                    return Err(Error::RegimeMismatch(format!(
                        "fast-regime parameters carry eps = {e}, requested eps = {eps}"
                    )));
                }
                Ok(omega1 / eps.powf(1.0 + alpha))
            }
        }
    }

    /// Multiplier turning a GP energy into the scale of the TF energy:
    /// ε² in the fixed regime, ε^{2+2α} in the fast one.
    pub fn gp_energy_scale(&self, eps: f64) -> f64 {
        match *self {
            TfRegimeParams::Fixed { .. } => eps * eps,
            TfRegimeParams::Fast { alpha, .. } => eps.powf(2.0 + 2.0 * alpha),
        }
    }
}

/// Closed-form TF minimizer for one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfSolution {
    pub regime: TfRegimeParams,
    pub energy: f64,
    /// R₀, present only in the fixed regime with Ω₀ > 4/√π.
    pub hole_radius: Option<f64>,
    /// R_ε, present only in the fast regime with Ω₁/ε^α > 4/√π.
    pub boundary_radius: Option<f64>,
}

/// Density of the reduced problem at angular velocity `w`.
fn reduced_density(w: f64, r: f64) -> f64 {
    if w <= HOLE_THRESHOLD {
        1.0 / PI - w * w / 16.0 * (1.0 - 2.0 * r * r)
    } else {
        (w * w / 8.0 * (r * r - 1.0) + w / (2.0 * PI.sqrt())).max(0.0)
    }
}

fn reduced_energy(w: f64) -> f64 {
    if w <= HOLE_THRESHOLD {
        1.0 / PI - w * w / 8.0 - PI * w.powi(4) / 768.0
    } else {
        w / 4.0 * (8.0 / (3.0 * PI.sqrt()) - w)
    }
}

fn reduced_hole_radius(w: f64) -> Option<f64> {
    (w > HOLE_THRESHOLD).then(|| (1.0 - 4.0 / (PI.sqrt() * w)).sqrt())
}

/// Both closed-form branches of the density, for continuity checks at the threshold.
pub fn density_branches(omega0: f64, r: f64) -> (f64, f64) {
    let w = omega0;
    (
        1.0 / PI - w * w / 16.0 * (1.0 - 2.0 * r * r),
        (w * w / 8.0 * (r * r - 1.0) + w / (2.0 * PI.sqrt())).max(0.0),
    )
}

/// Both closed-form branches of the energy.
pub fn energy_branches(omega0: f64) -> (f64, f64) {
    let w = omega0;
    (
        1.0 / PI - w * w / 8.0 - PI * w.powi(4) / 768.0,
        w / 4.0 * (8.0 / (3.0 * PI.sqrt()) - w),
    )
}

pub fn tf_solve(params: TfRegimeParams) -> Result<TfSolution> {
    params.validate()?;
    let w = params.effective_omega0();
    let r = reduced_hole_radius(w);
    let (hole_radius, boundary_radius) = match params {
        TfRegimeParams::Fixed { .. } => (r, None),
        TfRegimeParams::Fast { .. } => (None, r),
    };
    Ok(TfSolution {
        regime: params,
        energy: params.energy_scale() * reduced_energy(w),
        hole_radius,
        boundary_radius,
    })
}

impl TfSolution {
    /// ρ(r) for r in [0, 1].
    pub fn density(&self, r: f64) -> f64 {
        let w = self.regime.effective_omega0();
        reduced_density(w, r)
    }

    /// Inner edge of the support, 0 when there is no hole.
    pub fn support_inner_radius(&self) -> f64 {
        self.hole_radius.or(self.boundary_radius).unwrap_or(0.0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        breakpoints(0.0, 1.0, &[self.support_inner_radius()])
    }

    /// 2π ∫₀¹ g(ρ(r), r) r dr by adaptive Gauss–Legendre with a breakpoint at
    /// the support edge.
    pub fn integrate<G: Fn(f64, f64) -> f64>(&self, g: G) -> Result<f64> {
        integrate_adaptive(
            |r| 2.0 * PI * g(self.density(r), r) * r,
            &self.breakpoints(),
            1e-13,
        )
    }

    /// ∫ ρ over the unit disc.
    pub fn mass(&self) -> Result<f64> {
        self.integrate(|rho, _| rho)
    }

    /// ‖ρ‖₂².
    pub fn l2_norm_sq(&self) -> Result<f64> {
        self.integrate(|rho, _| rho * rho)
    }
}

/// The TF functional evaluated on the closed-form density by quadrature.
pub fn tf_energy_quadrature(solution: &TfSolution) -> Result<f64> {
    let w = solution.regime.effective_omega0();
    let reduced = solution.integrate(|rho, r| rho * rho - w * w * r * r * rho / 4.0)?;
    Ok(solution.regime.energy_scale() * reduced)
}

/// The TF functional ∫ ρ² − Ω₀² r² ρ / 4 (fast regime: rescaled) evaluated on
/// an arbitrary radial density.
pub fn tf_functional<F: Fn(f64) -> f64>(
    params: TfRegimeParams,
    rho: F,
    kinks: &[f64],
) -> Result<f64> {
    let w = params.effective_omega0();
    let reduced = integrate_adaptive(
        |r| {
            let p = rho(r);
            2.0 * PI * (p * p - w * w * r * r * p / 4.0) * r
        },
        &breakpoints(0.0, 1.0, kinks),
        1e-12,
    )?;
    Ok(params.energy_scale() * reduced)
}

/// Minimizer of the reduced giant-vortex functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GiantVortexEnergy {
    pub energy: f64,
    pub nu: f64,
    /// Chemical potential λ of the inner problem at the optimal ν.
    pub lambda: f64,
}

/// Inner minimum of `∫ ν²ρ/r² − Ω₁νρ + c ρ²` over normalized ρ ≥ 0 with
/// c = ε^{2α}.
///
/// The minimizer is ρ = [λ − V]₊/(2c), V = ν²/r² − Ω₁ν, supported on
/// r ≥ r_λ = ν/√a with a = λ + Ω₁ν. Returns (energy, λ).
pub fn giant_vortex_inner(nu: f64, omega1: f64, c: f64) -> Result<(f64, f64)> {
    if nu == 0.0 {
        let lambda = 2.0 * c / PI;
        return Ok((c / PI, lambda));
    }
    let nu2 = nu * nu;
    // Normalization in terms of a: (a − ν²)/2 − (ν²/2) ln(a/ν²) = c/π, with
    // the left side increasing in a on (ν², ∞).
    let target = c / PI;
    let g = |a: f64| 0.5 * (a - nu2) - 0.5 * nu2 * (a / nu2).ln();
    let mut lo = nu2;
    let mut hi = nu2 + 2.0 * target + 1.0;
    while g(hi) < target {
        hi = nu2 + 2.0 * (hi - nu2);
        if !hi.is_finite() {
            return Err(Error::SearchNonconvergence(
                "normalization bracket overflow".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    let b = omega1 * nu;
    let lambda = a - b;
    let rl2 = nu2 / a;
    // moments over the support of r dr, 1/r² r dr ν², 1/r⁴ r dr ν⁴
    let m0 = 0.5 * (1.0 - rl2);
    let m1 = 0.5 * nu2 * (a / nu2).ln();
    let m2 = 0.5 * nu2 * nu2 * (1.0 / rl2 - 1.0);
    let v_rho = PI / c * (a * m1 - m2 - a * b * m0 + b * m1);
    Ok((0.5 * (lambda + v_rho), lambda))
}

/// Minimizes the reduced giant-vortex functional over ν ≥ 0.
///
/// A 64-point grid on [0, 2Ω₁] brackets the minimum, which is then refined by
/// golden-section search.
pub fn giant_vortex_energy(omega1: f64, alpha: f64, eps: f64) -> Result<GiantVortexEnergy> {
    TfRegimeParams::Fast { omega1, alpha, eps }.validate()?;
    let c = eps.powf(2.0 * alpha);
    let f = |nu: f64| giant_vortex_inner(nu, omega1, c).map(|(e, _)| e);

    const GRID: usize = 64;
    let h = 2.0 * omega1 / (GRID - 1) as f64;
    let mut best = (0usize, f64::INFINITY);
    for i in 0..GRID {
        let e = f(i as f64 * h)?;
        if e < best.1 {
            best = (i, e);
        }
    }
    if best.0 == GRID - 1 {
        return Err(Error::SearchNonconvergence(format!(
            "minimum over nu sits at the bracket edge 2*omega1 = {}",
            2.0 * omega1
        )));
    }
    let mut a = best.0.saturating_sub(1) as f64 * h;
    let mut b = (best.0 + 1) as f64 * h;
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - invphi * (b - a);
    let mut x2 = a + invphi * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if b - a <= 1e-12 * omega1.max(1.0) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2)?;
        }
    }
    let refined = 0.5 * (a + b);
    let nu = if f(refined)? <= best.1 {
        refined
    } else {
        best.0 as f64 * h
    };
    let (energy, lambda) = giant_vortex_inner(nu, omega1, c)?;
    Ok(GiantVortexEnergy { energy, nu, lambda })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::CompositeRule;

    fn fixed(omega0: f64) -> TfSolution {
        tf_solve(TfRegimeParams::Fixed { omega0 }).unwrap()
    }

    #[test]
    fn slow_limit_is_uniform() {
        let s = fixed(1e-6);
        assert!((s.energy - 1.0 / PI).abs() < 1e-11);
        for r in [0.0, 0.3, 1.0] {
            assert!((s.density(r) - 1.0 / PI).abs() < 1e-12);
        }
        assert!(s.hole_radius.is_none());
        assert!((tf_energy_quadrature(&s).unwrap() - 1.0 / PI).abs() < 1e-11);
    }

    #[test]
    fn hole_radius_at_twice_threshold() {
        let s = fixed(8.0 / PI.sqrt());
        assert!((s.hole_radius.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.density(0.5), 0.0);
    }

    #[test]
    fn fast_energy_formula() {
        let s = tf_solve(TfRegimeParams::Fast {
            omega1: 1.0,
            alpha: 1.0,
            eps: 0.01,
        })
        .unwrap();
        let expect = -0.25 * (1.0 - 8.0 * 0.01 / (3.0 * PI.sqrt()));
        assert!((s.energy - expect).abs() < 1e-14);
        let r_eps = (1.0 - 4.0 * 0.01 / PI.sqrt()).sqrt();
        assert!((s.boundary_radius.unwrap() - r_eps).abs() < 1e-14);
        // closed-form fast-regime density: Ω₁²/(8ε^{2α}) [r² − R_ε²]₊
        for r in [0.5, 0.99, 0.995, 1.0] {
            let closed = 1.0 / (8.0 * 1e-4) * (r * r - r_eps * r_eps).max(0.0);
            assert!((s.density(r) - closed).abs() < 1e-9 * closed.max(1.0));
        }
    }

    #[test]
    fn branches_meet_at_threshold() {
        let w = HOLE_THRESHOLD;
        for r in [0.0, 0.25, 0.5, 0.9, 1.0] {
            let (a, b) = density_branches(w, r);
            assert!((a - b).abs() < 1e-12);
            assert!((a - 2.0 * r * r / PI).abs() < 1e-12);
        }
        let (a, b) = energy_branches(w);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        for w in [1.0, HOLE_THRESHOLD, 4.0, 8.0 / PI.sqrt(), 8.0] {
            let s = fixed(w);
            let q = tf_energy_quadrature(&s).unwrap();
            assert!(
                (q - s.energy).abs() < 1e-9,
                "omega0 = {w}: {q} vs {}",
                s.energy
            );
            assert!((s.mass().unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn fast_quadrature_and_mass() {
        for eps in [0.1, 0.05, 0.01] {
            let s = tf_solve(TfRegimeParams::Fast {
                omega1: 1.0,
                alpha: 1.0,
                eps,
            })
            .unwrap();
            assert!((s.mass().unwrap() - 1.0).abs() < 1e-8);
            assert!((tf_energy_quadrature(&s).unwrap() - s.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn delta_concentration() {
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let s = tf_solve(TfRegimeParams::Fast {
                omega1: 1.0,
                alpha: 1.0,
                eps,
            })
            .unwrap();
            let m = s.integrate(|rho, r| rho * r * r).unwrap();
            let err = (m - 1.0).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(tf_solve(TfRegimeParams::Fixed { omega0: 0.0 }).is_err());
        assert!(tf_solve(TfRegimeParams::Fast {
            omega1: 1.0,
            alpha: 1.0,
            eps: 1.0
        })
        .is_err());
        assert!(tf_solve(TfRegimeParams::Fast {
            omega1: 1.0,
            alpha: -1.0,
            eps: 0.1
        })
        .is_err());
    }

    // Brute-force reference for the inner problem: bisection on λ with the
    // mass and energy integrals done by quadrature.
    fn inner_by_quadrature(nu: f64, omega1: f64, c: f64) -> f64 {
        let rule = CompositeRule::new(20, 400);
        let v = |r: f64| nu * nu / (r * r) - omega1 * nu;
        let rho = |lambda: f64, r: f64| ((lambda - v(r)) / (2.0 * c)).max(0.0);
        let edge = |lambda: f64| {
            let a = lambda + omega1 * nu;
            if a > 0.0 {
                (nu / a.sqrt()).min(1.0)
            } else {
                1.0
            }
        };
        let mass =
            |lambda: f64| rule.integrate(&|r| 2.0 * PI * rho(lambda, r) * r, &[edge(lambda), 1.0]);
        let (mut lo, mut hi) = (-omega1 * nu, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mass(mid) < 1.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let l = 0.5 * (lo + hi);
        rule.integrate(
            &|r| {
                let p = rho(l, r);
                2.0 * PI * (v(r) * p + c * p * p) * r
            },
            &[edge(l), 1.0],
        )
    }

    #[test]
    fn inner_closed_form_matches_quadrature() {
        for (nu, om, c) in [(0.5, 1.0, 0.01), (1.0, 2.0, 0.0025), (0.3, 1.0, 0.1)] {
            let (e, _) = giant_vortex_inner(nu, om, c).unwrap();
            let q = inner_by_quadrature(nu, om, c);
            assert!((e - q).abs() < 1e-7 * q.abs().max(1.0), "{e} vs {q}");
        }
    }

    #[test]
    fn giant_vortex_limit_and_ordering() {
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.05, 0.025] {
            let g = giant_vortex_energy(1.0, 1.0, eps).unwrap();
            let tf = tf_solve(TfRegimeParams::Fast {
                omega1: 1.0,
                alpha: 1.0,
                eps,
            })
            .unwrap();
            assert!(g.energy > tf.energy);
            assert!(g.energy < prev);
            assert!(g.energy > -0.25);
            prev = g.energy;
        }
        assert!((prev + 0.25).abs() < 0.05);
    }

    #[test]
    fn optimal_nu_matches_grid_search() {
        let g = giant_vortex_energy(2.0, 1.0, 0.05).unwrap();
        let c = 0.05f64.powi(2);
        let mut best = (0.0, f64::INFINITY);
        for i in 0..=40_000 {
            let nu = 4.0 * i as f64 / 40_000.0;
            let e = giant_vortex_inner(nu, 2.0, c).unwrap().0;
            if e < best.1 {
                best = (nu, e);
            }
        }
        assert!((g.nu - best.0).abs() < 2e-4, "{} vs {}", g.nu, best.0);
        assert!(g.energy <= best.1 + 1e-12);
        assert!((g.nu - 1.0).abs() < 0.1);
    }
}

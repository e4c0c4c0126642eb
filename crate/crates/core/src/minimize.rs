//! Descent on the unit L² sphere.
//!
//! The search direction is the projected gradient, optionally measured in a
//! Sobolev metric: the gradient and the current state are both passed through
//! (H_mag + s)⁻¹, where H_mag is the nonnegative magnetic kinetic operator,
//! and the combination tangent to the sphere is used. Each step is followed
//! by renormalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{normalize, DiscOperator, EnergyBreakdown, EnergyForm, GridSpec, WaveField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepControl {
    Fixed,
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentMetric {
    L2,
    Sobolev,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Initial (or fixed) step length.
    pub step: f64,
    /// Target for the projected-gradient norm.
    pub tol: f64,
    pub step_control: StepControl,
    /// Seed for [`random_initial`].
    pub seed: u64,
    pub metric: DescentMetric,
    /// Polak–Ribière conjugation of successive directions.
    pub conjugate: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 2000,
            step: 0.5,
            tol: 1e-6,
            step_control: StepControl::Backtracking,
            seed: 0,
            metric: DescentMetric::Sobolev,
            conjugate: true,
        }
    }
}

impl MinimizeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 || !(self.step > 0.0) || !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need max_iters >= 1, step > 0, tol > 0; got {}, {}, {}",
                self.max_iters, self.step, self.tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub field: WaveField,
    pub energy: EnergyBreakdown,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The line search could no longer resolve an energy decrease.
    pub stalled: bool,
    pub mu: f64,
    /// Energy of every accepted iterate, starting with the initial state.
    pub energy_history: Vec<f64>,
}

/// Gradient of the discrete energy with respect to the real inner product
/// Re∫ψ̄φ: 2Hψ + (4/ε²)|ψ|²ψ, with H = −Δ − ΩL.
pub fn gp_gradient(field: &WaveField, omega: f64, eps: f64) -> WaveField {
    gradient_with(&DiscOperator::new(&field.grid), field, omega, eps)
}

fn gradient_with(op: &DiscOperator, field: &WaveField, omega: f64, eps: f64) -> WaveField {
    gradient_and_h(op, field, omega, eps).0
}

/// The gradient together with Hψ.
fn gradient_and_h(
    op: &DiscOperator,
    field: &WaveField,
    omega: f64,
    eps: f64,
) -> (WaveField, WaveField) {
    let h = op.apply_h(field, omega);
    let mut g = h.clone();
    let c = 4.0 / (eps * eps);
    for (gi, &z) in g.values.iter_mut().zip(&field.values) {
        *gi = 2.0 * *gi + c * z.norm_sqr() * z;
    }
    (g, h)
}

/// Norm of the gradient with its component along ψ removed.
pub fn residual_norm(field: &WaveField, omega: f64, eps: f64) -> f64 {
    let g = gp_gradient(field, omega, eps);
    projected_norm(field, &g)
}

fn projected_norm(field: &WaveField, g: &WaveField) -> f64 {
    tangent(field, g).norm()
}

/// g with its component along the field removed.
fn tangent(field: &WaveField, g: &WaveField) -> WaveField {
    let a = field.inner_re(g) / field.norm_sq();
    let mut p = g.clone();
    p.axpy(-a, field);
    p
}

/// Normalized smooth random state.
pub fn random_initial(grid: &GridSpec, seed: u64) -> WaveField {
    normalize(&WaveField::random_smooth(grid, seed, 6)).expect("random field is nonzero")
}

struct Descent<'a> {
    op: DiscOperator,
    omega: f64,
    eps: f64,
    shift: f64,
    opts: &'a MinimizeOptions,
}

impl Descent<'_> {
    fn energy(&self, f: &WaveField) -> f64 {
        self.op
            .energy(f, self.omega, self.eps, EnergyForm::AngularMomentum)
            .total
    }

    /// Preconditioned gradient projected onto the tangent space at ψ.
    fn precondition(&self, psi: &WaveField, grad: &WaveField) -> WaveField {
        match self.opts.metric {
            DescentMetric::L2 => tangent(psi, grad),
            DescentMetric::Sobolev => {
                let a = self.op.solve_shifted_magnetic(grad, self.omega, self.shift);
                let b = self.op.solve_shifted_magnetic(psi, self.omega, self.shift);
                let coef = psi.inner_re(&a) / psi.inner_re(&b);
                let mut p = a;
                p.axpy(-coef, &b);
                p
            }
        }
    }
}

/// (ψ + τd) rescaled to the norm of ψ. `d` is tangent, so the rescaling
/// factor is 1/√(1 + τ²‖d‖²/‖ψ‖²), which avoids re-rounding the norm of ψ.
fn step_to(psi: &WaveField, d: &WaveField, tau: f64) -> Result<WaveField> {
    let mut next = psi.clone();
    next.axpy(tau, d);
    let ratio = tau * tau * d.norm_sq() / psi.norm_sq();
    if !ratio.is_finite() {
        return Err(Error::ZeroField);
    }
    next.scale(1.0 / (1.0 + ratio).sqrt());
    Ok(next)
}

pub fn minimize(
    initial: &WaveField,
    omega: f64,
    eps: f64,
    options: &MinimizeOptions,
) -> Result<MinimizeResult> {
    options.validate()?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    crate::field::energy_check_normalized(initial)?;
    let quartic = initial.ring_sums(|z| z.norm_sqr() * z.norm_sqr());
    let ctx = Descent {
        op: DiscOperator::new(&initial.grid),
        omega,
        eps,
        shift: (quartic / (eps * eps)).max(1.0),
        opts: options,
    };

    let mut psi = initial.clone();
    let mut e = ctx.energy(&psi);
    let mut history = vec![e];
    let mut best = (e, psi.clone());
    let mut tau = options.step;
    let mut iterations = 0;
    let mut stalled = false;
    let mut residual;
    // previous direction, preconditioned gradient and gradient for conjugation
    let mut prev: Option<(WaveField, WaveField, WaveField)> = None;

    loop {
        let (full, h_psi) = gradient_and_h(&ctx.op, &psi, omega, eps);
        // the component along ψ is of order μ and would swamp the tangent part
        // in every inner product below
        let grad = tangent(&psi, &full);
        residual = grad.norm();
        if residual <= options.tol || iterations >= options.max_iters {
            break;
        }
        iterations += 1;
        let p = ctx.precondition(&psi, &grad);
        let mut d = p.clone();
        d.scale(-1.0);
        if options.conjugate && options.step_control == StepControl::Backtracking {
            if let Some((d_old, p_old, g_old)) = &prev {
                let denom = g_old.inner_re(p_old);
                let beta = ((grad.inner_re(&p) - g_old.inner_re(&p)) / denom).max(0.0);
                if beta > 0.0 && beta.is_finite() {
                    let mut t = d_old.clone();
                    t.axpy(-psi.inner_re(&t), &psi);
                    d.axpy(beta, &t);
                    if !(grad.inner_re(&d) < 0.0) {
                        d = p.clone();
                        d.scale(-1.0);
                    }
                }
            }
        }
        d.axpy(-psi.inner_re(&d) / psi.norm_sq(), &psi);
        let slope = grad.inner_re(&d);
        if !(slope < 0.0) {
            stalled = true;
            break;
        }
        match options.step_control {
            StepControl::Fixed => {
                psi = step_to(&psi, &d, options.step)?;
                e = ctx.energy(&psi);
                history.push(e);
                if e < best.0 {
                    best = (e, psi.clone());
                }
            }
            StepControl::Backtracking => loop {
                let diff = |x: &WaveField| ctx.op.energy_difference(&psi, &h_psi, x, omega, eps);
                let trial = step_to(&psi, &d, tau)?;
                let dt = diff(&trial);
                if dt <= 1e-4 * tau * slope {
                    // one parabolic refinement through E(0), E'(0) and E(τ)
                    let curv = dt - slope * tau;
                    let mut accepted = (trial, dt, tau);
                    if curv > 0.0 {
                        let tq = (-slope * tau * tau / (2.0 * curv)).min(4.0 * tau);
                        if (tq - tau).abs() > 0.1 * tau {
                            let alt = step_to(&psi, &d, tq)?;
                            let da = diff(&alt);
                            if da < dt {
                                accepted = (alt, da, tq);
                            }
                        }
                    } else {
                        accepted.2 = 2.0 * tau;
                    }
                    prev = Some((d.clone(), p.clone(), grad.clone()));
                    psi = accepted.0;
                    // accumulate the accurate differences so the history is free of cancellation noise
                    e += accepted.1;
                    tau = accepted.2.min(1e3);
                    history.push(e);
                    best = (e, psi.clone());
                    break;
                }
                // the step no longer changes ψ in floating point
                if slope.abs() < 16.0 * f64::EPSILON * e.abs().max(1.0) * d.norm()
                    || trial.values == psi.values
                {
                    stalled = true;
                    break;
                }
                tau *= 0.5;
                if tau < 1e-14 {
                    return Err(Error::StepUnderflow {
                        iterations,
                        energy: e,
                    });
                }
            },
        }
        if stalled {
            break;
        }
    }

    let field = best.1;
    let op = &ctx.op;
    let residual = if options.step_control == StepControl::Fixed {
        projected_norm(&field, &gradient_with(op, &field, omega, eps))
    } else {
        residual
    };
    let energy = op.energy(&field, omega, eps, EnergyForm::AngularMomentum);
    Ok(MinimizeResult {
        mu: energy.total + energy.interaction,
        converged: residual <= options.tol,
        field,
        energy,
        residual,
        iterations,
        stalled,
        energy_history: history,
    })
}

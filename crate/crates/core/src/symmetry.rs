//! Restricted minimisation in the angular-momentum eigenspaces f(r)e^{inθ}.
//!
//! On the sector n the energy is
//! E_n[ξ] = 2π∫ (ξ′² + n²ξ²/r² + ξ⁴/ε²) r dr,
//! and the rotation term contributes the constant −Ωn. The radial grid and
//! stencil are those of [`crate::field::DiscOperator`] with a Neumann outer
//! face, so E_n on n_r cells equals the two-dimensional discrete energy of
//! ξ(r_j)e^{inθ_k} on any grid with the same n_r and n_θ > 2n.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::WaveField;
use crate::HOLE_THRESHOLD;

const TOL: f64 = 1e-9;
const FLOW_ITERS: usize = 20_000;
const NEWTON_ITERS: usize = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub n: u32,
    pub eps: f64,
    pub omega: f64,
    /// Cell centres.
    pub r: Vec<f64>,
    pub xi: Vec<f64>,
    /// E_n − Ωn.
    pub energy_restricted: f64,
    /// The Ω-independent part E_n.
    pub e_n_part: f64,
    pub mu: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Number of cells where ξ decreases outward.
    pub monotone_violations: usize,
}

impl RadialProfile {
    /// 2π∑ξ²r Δr.
    pub fn norm_sq(&self) -> f64 {
        Radial::new(self.n, self.eps, self.r.len()).norm_sq(&self.xi)
    }

    /// The profile as a two-dimensional field ξ(r)e^{inθ}.
    pub fn to_field(&self, n_theta: usize, bc: crate::BoundaryCondition) -> Result<WaveField> {
        let grid = crate::GridSpec::new(self.r.len(), n_theta, bc)?;
        let n = self.n as f64;
        let xi = self.xi.clone();
        let nt = n_theta;
        let mut f = WaveField::zeros(&grid);
        for (j, &x) in xi.iter().enumerate() {
            for k in 0..nt {
                let th = grid.theta_nodes[k];
                f.values[grid.index(j, k)] = num_complex::Complex64::from_polar(x, n * th);
            }
        }
        Ok(f)
    }
}

/// Discrete radial problem on the sector n.
struct Radial {
    n2: f64,
    inv_eps2: f64,
    r: Vec<f64>,
    /// Cell weights 2πr_jΔr.
    w: Vec<f64>,
    /// Face coefficients 2πr_{j+½}/Δr between cells j and j+1.
    face: Vec<f64>,
}

impl Radial {
    fn new(n: u32, eps: f64, n_r: usize) -> Self {
        let dr = 1.0 / n_r as f64;
        let r: Vec<f64> = (0..n_r).map(|j| (j as f64 + 0.5) * dr).collect();
        Radial {
            n2: (n as f64).powi(2),
            inv_eps2: 1.0 / (eps * eps),
            w: r.iter().map(|r| 2.0 * PI * r * dr).collect(),
            face: (0..n_r - 1).map(|j| 2.0 * PI * (j + 1) as f64).collect(),
            r,
        }
    }

    fn len(&self) -> usize {
        self.r.len()
    }

    fn norm_sq(&self, xi: &[f64]) -> f64 {
        self.w.iter().zip(xi).map(|(w, x)| w * x * x).sum()
    }

    /// Diagonal of the linear potential n²/r².
    fn centrifugal(&self, j: usize) -> f64 {
        self.n2 / (self.r[j] * self.r[j])
    }

    /// S ξ, the weighted quadratic form's matrix applied to ξ (symmetric).
    fn stiffness(&self, xi: &[f64]) -> Vec<f64> {
        let m = self.len();
        let mut out: Vec<f64> = (0..m)
            .map(|j| self.w[j] * self.centrifugal(j) * xi[j])
            .collect();
        for j in 0..m - 1 {
            let d = self.face[j] * (xi[j + 1] - xi[j]);
            out[j] -= d;
            out[j + 1] += d;
        }
        out
    }

    fn energy(&self, xi: &[f64]) -> f64 {
        let mut e = 0.0;
        for (j, x) in xi.iter().enumerate() {
            let x2 = x * x;
            e += self.w[j] * (self.centrifugal(j) * x2 + self.inv_eps2 * x2 * x2);
        }
        for j in 0..self.len() - 1 {
            e += self.face[j] * (xi[j + 1] - xi[j]).powi(2);
        }
        e
    }

    /// Weighted residual W⁻¹(Sξ) + 2ξ³/ε² − μξ with μ chosen to make it
    /// orthogonal to ξ; returns (residual vector, μ).
    fn half_gradient(&self, xi: &[f64]) -> (Vec<f64>, f64) {
        let s = self.stiffness(xi);
        let g: Vec<f64> = (0..self.len())
            .map(|j| s[j] / self.w[j] + 2.0 * self.inv_eps2 * xi[j].powi(3))
            .collect();
        let mu = self
            .w
            .iter()
            .zip(xi)
            .zip(&g)
            .map(|((w, x), g)| w * x * g)
            .sum::<f64>()
            / self.norm_sq(xi);
        let res = g.iter().zip(xi).map(|(g, x)| g - mu * x).collect();
        (res, mu)
    }

    /// Norm of the projected gradient of E, matching the two-dimensional
    /// residual of the same state.
    fn residual(&self, xi: &[f64]) -> (f64, f64) {
        let (res, mu) = self.half_gradient(xi);
        (2.0 * self.norm_sq(&res).sqrt(), mu)
    }

    fn normalize(&self, xi: &mut [f64]) {
        let s = self.norm_sq(xi).sqrt();
        xi.iter_mut().for_each(|x| *x /= s);
    }

    /// Solves (S + W diag(d)) x = b.
    fn solve(&self, diag: &[f64], b: &[f64]) -> Vec<f64> {
        let m = self.len();
        let mut lower = vec![0.0; m];
        let mut main: Vec<f64> = (0..m)
            .map(|j| self.w[j] * (self.centrifugal(j) + diag[j]))
            .collect();
        let mut upper = vec![0.0; m];
        for j in 0..m - 1 {
            main[j] += self.face[j];
            main[j + 1] += self.face[j];
            upper[j] = -self.face[j];
            lower[j + 1] = -self.face[j];
        }
        thomas(&lower, &main, &upper, b)
    }

    /// One implicit gradient-flow step of length τ with the density frozen,
    /// followed by renormalization. Positivity is preserved.
    fn flow_step(&self, xi: &[f64], tau: f64) -> Vec<f64> {
        let diag: Vec<f64> = xi
            .iter()
            .map(|x| 1.0 / tau + 2.0 * self.inv_eps2 * x * x)
            .collect();
        let b: Vec<f64> = (0..self.len()).map(|j| self.w[j] * xi[j] / tau).collect();
        let mut out = self.solve(&diag, &b);
        self.normalize(&mut out);
        out
    }

    /// Newton step on (ξ, μ) for Aξ + 2ξ³/ε² = μξ, ∑wξ² = 1.
    fn newton_step(&self, xi: &[f64], mu: f64) -> Option<(Vec<f64>, f64)> {
        let m = self.len();
        let s = self.stiffness(xi);
        let wr: Vec<f64> = (0..m)
            .map(|j| s[j] + self.w[j] * (2.0 * self.inv_eps2 * xi[j].powi(3) - mu * xi[j]))
            .collect();
        let c = self.norm_sq(xi) - 1.0;
        let diag: Vec<f64> = xi
            .iter()
            .map(|x| 6.0 * self.inv_eps2 * x * x - mu)
            .collect();
        let a = self.solve(&diag, &wr.iter().map(|v| -v).collect::<Vec<_>>());
        let wxi: Vec<f64> = (0..m).map(|j| self.w[j] * xi[j]).collect();
        let b = self.solve(&diag, &wxi);
        let num = -c - 2.0 * dot(&wxi, &a);
        let den = 2.0 * dot(&wxi, &b);
        if !(den.abs() > 0.0) {
            return None;
        }
        let dmu = num / den;
        let next: Vec<f64> = (0..m).map(|j| xi[j] + a[j] + dmu * b[j]).collect();
        next.iter()
            .all(|v| v.is_finite())
            .then_some((next, mu + dmu))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn thomas(lower: &[f64], main: &[f64], upper: &[f64], b: &[f64]) -> Vec<f64> {
    let m = main.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = upper[0] / main[0];
    d[0] = b[0] / main[0];
    for j in 1..m {
        let den = main[j] - lower[j] * c[j - 1];
        c[j] = if j + 1 < m { upper[j] / den } else { 0.0 };
        d[j] = (b[j] - lower[j] * d[j - 1]) / den;
    }
    for j in (0..m - 1).rev() {
        d[j] -= c[j] * d[j + 1];
    }
    d
}

/// Ground state of the radial functional on the sector n.
///
/// Positive initial data are relaxed by an implicit gradient flow, which
/// keeps ξ positive and so stays on the nodeless branch, and then polished
/// by Newton's method. A profile that fails to reach the tolerance is
/// returned with `converged = false`.
pub fn radial_minimize(n: u32, eps: f64, omega: f64, n_r: usize) -> Result<RadialProfile> {
    if !(eps > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need eps > 0 and finite omega; got {eps}, {omega}"
        )));
    }
    if n_r < 16 {
        return Err(Error::InvalidParameter(format!(
            "n_r must be at least 16, got {n_r}"
        )));
    }
    let p = Radial::new(n, eps, n_r);
    let ell2 = (eps * (n.max(1)) as f64).powi(2);
    let mut xi: Vec<f64> =
        p.r.iter()
            .map(|r| (r * r / (r * r + ell2)).powf(n as f64 / 2.0))
            .collect();
    p.normalize(&mut xi);

    let tau = 1.0;
    let mut iterations = 0;
    let (mut residual, mut mu) = p.residual(&xi);
    while residual > 1e-3 * p.inv_eps2 && iterations < FLOW_ITERS {
        xi = p.flow_step(&xi, tau);
        iterations += 1;
        (residual, mu) = p.residual(&xi);
    }
    let mut newton = 0;
    while residual > TOL && newton < NEWTON_ITERS {
        let candidate = p.newton_step(&xi, mu).and_then(|(mut next, _)| {
            p.normalize(&mut next);
            let (res, m) = p.residual(&next);
            (next.iter().all(|&v| v >= 0.0) && res < residual).then_some((next, res, m))
        });
        match candidate {
            Some((next, res, m)) => {
                xi = next;
                residual = res;
                mu = m;
            }
            None => {
                // fall back to the flow when Newton does not improve
                for _ in 0..50 {
                    xi = p.flow_step(&xi, tau);
                    iterations += 1;
                }
                (residual, mu) = p.residual(&xi);
            }
        }
        newton += 1;
        iterations += 1;
    }
    let e_n = p.energy(&xi);
    let peak = xi.iter().cloned().fold(0.0, f64::max);
    let monotone_violations = xi.windows(2).filter(|w| w[1] < w[0] - 1e-12 * peak).count();
    Ok(RadialProfile {
        n,
        eps,
        omega,
        r: p.r.clone(),
        xi,
        energy_restricted: e_n - omega * n as f64,
        e_n_part: e_n,
        mu,
        residual,
        iterations,
        converged: residual <= TOL,
        monotone_violations,
    })
}

/// Whether n² − 2Ωn + 1/(πε²) > 0, the condition under which a symmetric
/// vortex of order n ≥ 2 is unstable.
pub fn instability_predicate(n: u32, omega: f64, eps: f64) -> Result<bool> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "instability needs n >= 2, got {n}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    let n = n as f64;
    Ok(n * n - 2.0 * omega * n + 1.0 / (PI * eps * eps) > 0.0)
}

/// E_{n+1} − E_n from the Ω-independent parts.
pub fn omega_gap(n: u32, eps: f64, n_r: usize) -> Result<f64> {
    let a = radial_minimize(n, eps, 0.0, n_r)?;
    let b = radial_minimize(n + 1, eps, 0.0, n_r)?;
    for p in [&a, &b] {
        if !p.converged {
            return Err(Error::SearchNonconvergence(format!(
                "radial problem n = {} stopped at residual {:e}",
                p.n, p.residual
            )));
        }
    }
    Ok(b.e_n_part - a.e_n_part)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchEntry {
    pub n: u32,
    pub e_n: f64,
    pub e_restricted: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricBranch {
    pub best_n: u32,
    pub energy: f64,
    /// Candidate optimal vorticity from the Thomas–Fermi estimate.
    pub seed_nbar: f64,
    pub table: Vec<BranchEntry>,
    pub warnings: Vec<String>,
}

/// Default window for the n-scan, ⌈2Ω⌉.
pub fn default_n_max(omega: f64) -> u32 {
    (2.0 * omega).ceil().max(1.0) as u32
}

/// Thomas–Fermi estimate of the best vorticity of a symmetric vortex at
/// Ω₀ = εΩ.
pub fn nbar_estimate(eps: f64, omega: f64) -> f64 {
    let omega0 = eps * omega;
    if omega0 <= HOLE_THRESHOLD {
        omega / 4.0 * (1.0 + PI * omega0 * omega0 / 48.0)
    } else {
        omega / 2.0 * (1.0 - 4.0 / (3.0 * PI.sqrt() * omega0))
    }
}

/// The lowest energy among the symmetric states ξ_n(r)e^{inθ}, n ≤ n_max.
pub fn symmetric_branch_energy(
    eps: f64,
    omega: f64,
    n_max: u32,
    n_r: usize,
) -> Result<SymmetricBranch> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let profiles: Vec<RadialProfile> = (0..=n_max)
        .into_par_iter()
        .map(|n| radial_minimize(n, eps, omega, n_r))
        .collect::<Result<_>>()?;
    let table: Vec<BranchEntry> = profiles
        .iter()
        .map(|p| BranchEntry {
            n: p.n,
            e_n: p.e_n_part,
            e_restricted: p.energy_restricted,
            converged: p.converged,
        })
        .collect();
    let best = table
        .iter()
        .min_by(|a, b| a.e_restricted.total_cmp(&b.e_restricted))
        .expect("table is nonempty");
    let mut warnings = Vec::new();
    if best.n == n_max {
        warnings.push(format!(
            "best n equals the window edge {n_max}; widen n_max"
        ));
    }
    for e in table.iter().filter(|e| !e.converged) {
        warnings.push(format!("radial problem n = {} did not converge", e.n));
    }
    Ok(SymmetricBranch {
        best_n: best.n,
        energy: best.e_restricted,
        seed_nbar: nbar_estimate(eps, omega),
        table,
        warnings,
    })
}

/// L² norm of |ψ|² minus its ring average; zero for eigenfunctions of L.
pub fn anisotropy_index(field: &WaveField) -> f64 {
    let g = &field.grid;
    let mut acc = 0.0;
    for j in 0..g.n_r {
        let dens: Vec<f64> = field.ring(j).iter().map(|z| z.norm_sqr()).collect();
        let mean = dens.iter().sum::<f64>() / g.n_theta as f64;
        let var: f64 = dens.iter().map(|d| (d - mean).powi(2)).sum();
        acc += g.weight(j) * var;
    }
    acc.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{gp_energy, EnergyForm};
    use crate::minimize::residual_norm;
    use crate::BoundaryCondition;

    #[test]
    fn zero_sector_is_constant() {
        let p = radial_minimize(0, 0.1, 3.0, 64).unwrap();
        assert!(p.converged);
        assert!((p.energy_restricted - 100.0 / PI).abs() < 1e-9);
        assert!(p.xi.iter().all(|x| (x - 1.0 / PI.sqrt()).abs() < 1e-9));
        assert!((p.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_two_dimensional_energy_and_residual() {
        for n in [1, 3] {
            let p = radial_minimize(n, 0.1, 2.0, 48).unwrap();
            assert!(p.converged);
            let f = p.to_field(16, BoundaryCondition::Neumann).unwrap();
            let e2 = gp_energy(&f, 2.0, 0.1, EnergyForm::AngularMomentum)
                .unwrap()
                .total;
            assert!((e2 - p.energy_restricted).abs() < 1e-9 * e2.abs());
            // a critical point of the sector is a critical point in 2D
            assert!(residual_norm(&f, 2.0, 0.1) < 1e-7);
        }
    }

    #[test]
    fn single_vortex_bound_and_profile() {
        let eps: f64 = 0.1;
        let p = radial_minimize(1, eps, 0.0, 256).unwrap();
        assert!(p.converged);
        assert!(p.e_n_part <= 1.0 / (PI * eps * eps) + (1.0 / (eps * eps)).ln() + 1.0);
        let peak = p.xi.iter().cloned().fold(0.0, f64::max);
        assert!(p.xi[0] < 0.05 * peak);
        assert_eq!(p.monotone_violations, 0);
    }

    #[test]
    fn energies_increase_with_n() {
        let e: Vec<f64> = (0..6)
            .map(|n| radial_minimize(n, 0.1, 0.0, 128).unwrap().e_n_part)
            .collect();
        assert!(e.windows(2).all(|w| w[1] > w[0]));
        let g0 = omega_gap(0, 0.1, 128).unwrap();
        assert!((g0 - (e[1] - e[0])).abs() < 1e-9);
        assert!(g0 <= 3.0 * ((100.0f64).ln() + 1.0));
        let g1 = omega_gap(1, 0.1, 128).unwrap();
        assert!(g1 <= 3.0 * g0);
    }

    #[test]
    fn predicate() {
        assert!(instability_predicate(1, 0.0, 0.1).is_err());
        assert!(!instability_predicate(2, 100.0, 0.1).unwrap());
        let eps = 0.1;
        let bound = 1.0 / (PI.sqrt() * eps);
        for n in 2..10 {
            for i in 0..=20 {
                assert!(instability_predicate(n, bound * i as f64 / 20.0, eps).unwrap());
            }
        }
    }

    #[test]
    fn branch_without_rotation() {
        let b = symmetric_branch_energy(0.1, 0.0, 3, 64).unwrap();
        assert_eq!(b.best_n, 0);
        assert!((b.energy - 100.0 / PI).abs() < 1e-9);
        assert_eq!(b.table.len(), 4);
    }

    #[test]
    fn branch_prefers_vortices_under_rotation() {
        let eps = 0.1;
        let omega = 30.0;
        let b = symmetric_branch_energy(eps, omega, default_n_max(omega), 96).unwrap();
        assert!(b.best_n > 0);
        assert!(b.warnings.is_empty(), "{:?}", b.warnings);
        assert!((b.best_n as f64 - b.seed_nbar).abs() < 0.5 * b.seed_nbar + 3.0);
    }

    #[test]
    fn seeds_by_regime() {
        let omega0: f64 = 1.0;
        let eps = 0.1;
        let n = nbar_estimate(eps, omega0 / eps);
        assert!((n - 10.0 / 4.0 * (1.0 + PI / 48.0)).abs() < 1e-12);
        let n = nbar_estimate(eps, 8.0 / eps);
        assert!((n - 80.0 / 2.0 * (1.0 - 4.0 / (3.0 * PI.sqrt() * 8.0))).abs() < 1e-12);
    }

    #[test]
    fn anisotropy_vanishes_on_eigenfunctions() {
        let g = crate::GridSpec::new(32, 32, BoundaryCondition::Neumann).unwrap();
        let f = WaveField::from_fn(&g, |r, th| {
            num_complex::Complex64::from_polar(r * r + 0.1, 3.0 * th)
        });
        assert!(anisotropy_index(&f) < 1e-10);
        let h = WaveField::from_fn(&g, |r, th| {
            num_complex::Complex64::new(1.0 + r * th.cos(), 0.0)
        });
        // ρ − ρ̄ = 2r cos θ + (r²/2)cos 2θ, with squared norm π + π/24
        let exact = (PI * (1.0 + 1.0 / 24.0)).sqrt();
        assert!((anisotropy_index(&h) - exact).abs() < 1e-2);
    }
}

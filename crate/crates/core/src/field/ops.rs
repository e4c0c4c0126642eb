//! Discrete operators on the polar grid.
//!
//! Radial derivatives use a finite-volume stencil over cell faces; the face at
//! the origin has zero area. Angular derivatives are taken per ring in Fourier
//! space, with the Nyquist mode carrying kinetic symbol (N/2)² and angular
//! momentum 0 so that both stay real and symmetric.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::grid::{BoundaryCondition, GridSpec};
use super::wavefield::{pairwise_sum, WaveField};

/// Per-node geometry and FFT plans for one grid, optionally dilated to a
/// disc of radius `radius`.
#[derive(Clone)]
pub struct DiscOperator {
    grid: GridSpec,
    radius: f64,
    r: Vec<f64>,
    dr: f64,
    dtheta: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    kappa: Vec<f64>,
    msym: Vec<f64>,
}

impl std::fmt::Debug for DiscOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiscOperator")
            .field("n_r", &self.grid.n_r)
            .field("n_theta", &self.grid.n_theta)
            .field("radius", &self.radius)
            .finish()
    }
}

/// Raw discrete integrals of a field, before Ω and ε are applied.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnergyTerms {
    pub norm_sq: f64,
    /// ∫ |∂_r ψ|² including the Dirichlet boundary face.
    pub radial: f64,
    /// ∫ |∂_θ ψ|²/r².
    pub angular: f64,
    /// ⟨ψ, Lψ⟩.
    pub lz: f64,
    /// ∫ |(∂_θ/r − iΩr/2) ψ|² at the Ω the terms were built with.
    pub magnetic_angular: f64,
    /// ∫ r² |ψ|².
    pub second_moment: f64,
    /// ∫ |ψ|⁴.
    pub quartic: f64,
}

impl DiscOperator {
    pub fn new(grid: &GridSpec) -> Self {
        Self::with_radius(grid, 1.0)
    }

    /// Operator on the disc of radius `radius`, with every length of `grid`
    /// multiplied by it.
    pub fn with_radius(grid: &GridSpec, radius: f64) -> Self {
        let n = grid.n_theta;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut kappa = vec![0.0; n];
        let mut msym = vec![0.0; n];
        for q in 0..n {
            let m = mode_number(q, n);
            if 2 * q == n {
                kappa[q] = (n as f64 / 2.0).powi(2);
                msym[q] = 0.0;
            } else {
                kappa[q] = (m * m) as f64;
                msym[q] = m as f64;
            }
        }
        DiscOperator {
            grid: grid.clone(),
            radius,
            r: grid.r_nodes.iter().map(|r| r * radius).collect(),
            dr: grid.dr() * radius,
            dtheta: grid.dtheta(),
            fwd,
            inv,
            kappa,
            msym,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    #[inline]
    fn weight(&self, j: usize) -> f64 {
        self.r[j] * self.dr * self.dtheta
    }

    /// Face coefficient r_{j+½}Δθ/Δr between rings j and j+1.
    #[inline]
    fn face(&self, j: usize) -> f64 {
        (j + 1) as f64 * self.dr * self.dtheta / self.dr
    }

    fn boundary_face(&self) -> f64 {
        match self.grid.bc {
            BoundaryCondition::Neumann => 0.0,
            BoundaryCondition::Dirichlet => 2.0 * self.radius * self.dtheta / self.dr,
        }
    }

    /// Symbol of the angular kinetic operator and of L for FFT bin `q`.
    pub fn symbols(&self, q: usize) -> (f64, f64) {
        (self.kappa[q], self.msym[q])
    }

    fn forward(&self, row: &[Complex64]) -> Vec<Complex64> {
        let mut buf = row.to_vec();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse_into(&self, mut modes: Vec<Complex64>, out: &mut [Complex64]) {
        self.inv.process(&mut modes);
        let s = 1.0 / self.grid.n_theta as f64;
        for (o, m) in out.iter_mut().zip(modes) {
            *o = m * s;
        }
    }

    /// All discrete integrals needed by both energy forms.
    pub fn terms(&self, field: &WaveField, omega: f64) -> EnergyTerms {
        let nt = self.grid.n_theta;
        let nr = self.grid.n_r;
        let bface = self.boundary_face();
        let rings: Vec<[f64; 7]> = (0..nr)
            .into_par_iter()
            .map(|j| {
                let row = field.ring(j);
                let w = self.weight(j);
                let r = self.r[j];
                let modes = self.forward(row);
                let spec = w / nt as f64;
                let p: Vec<f64> = modes.iter().map(|z| z.norm_sqr()).collect();
                let ang: Vec<f64> = (0..nt).map(|q| self.kappa[q] * p[q]).collect();
                let lz: Vec<f64> = (0..nt).map(|q| self.msym[q] * p[q]).collect();
                let mag: Vec<f64> = (0..nt)
                    .map(|q| {
                        let m = self.msym[q];
                        let d = m / r - omega * r / 2.0;
                        ((self.kappa[q] - m * m) / (r * r) + d * d) * p[q]
                    })
                    .collect();
                let dens: Vec<f64> = row.iter().map(|z| z.norm_sqr()).collect();
                let quart: Vec<f64> = dens.iter().map(|d| d * d).collect();
                let dsum = pairwise_sum(&dens);
                let radial = if j + 1 < nr {
                    let next = field.ring(j + 1);
                    let diffs: Vec<f64> = row
                        .iter()
                        .zip(next)
                        .map(|(a, b)| (b - a).norm_sqr())
                        .collect();
                    self.face(j) * pairwise_sum(&diffs)
                } else {
                    bface * dsum
                };
                [
                    w * dsum,
                    radial,
                    spec / (r * r) * pairwise_sum(&ang),
                    spec * pairwise_sum(&lz),
                    spec * pairwise_sum(&mag),
                    w * r * r * dsum,
                    w * pairwise_sum(&quart),
                ]
            })
            .collect();
        let col = |i: usize| pairwise_sum(&rings.iter().map(|t| t[i]).collect::<Vec<_>>());
        EnergyTerms {
            norm_sq: col(0),
            radial: col(1),
            angular: col(2),
            lz: col(3),
            magnetic_angular: col(4),
            second_moment: col(5),
            quartic: col(6),
        }
    }

    /// Applies the quadratic part H = −Δ − ΩL (with the grid's boundary
    /// condition), so that ⟨ψ, Hψ⟩ is the quadratic energy.
    pub fn apply_h(&self, field: &WaveField, omega: f64) -> WaveField {
        let nt = self.grid.n_theta;
        let nr = self.grid.n_r;
        let bface = self.boundary_face();
        let mut out = WaveField::zeros(&self.grid);
        out.values
            .par_chunks_mut(nt)
            .enumerate()
            .for_each(|(j, dst)| {
                let row = field.ring(j);
                let r = self.r[j];
                let mut modes = self.forward(row);
                for (q, z) in modes.iter_mut().enumerate() {
                    *z *= self.kappa[q] / (r * r) - omega * self.msym[q];
                }
                self.inverse_into(modes, dst);
                let w = self.weight(j);
                let up = (j + 1 < nr).then(|| (self.face(j) / w, field.ring(j + 1)));
                let down = (j > 0).then(|| (self.face(j - 1) / w, field.ring(j - 1)));
                let edge = if j + 1 == nr { bface / w } else { 0.0 };
                for k in 0..nt {
                    let mut acc = edge * row[k];
                    if let Some((c, nb)) = up {
                        acc += c * (row[k] - nb[k]);
                    }
                    if let Some((c, nb)) = down {
                        acc += c * (row[k] - nb[k]);
                    }
                    dst[k] += acc;
                }
            });
        out
    }

    /// Lψ = −i∂_θψ.
    pub fn apply_l(&self, field: &WaveField) -> WaveField {
        let nt = self.grid.n_theta;
        let mut out = WaveField::zeros(&self.grid);
        out.values
            .par_chunks_mut(nt)
            .enumerate()
            .for_each(|(j, dst)| {
                let mut modes = self.forward(field.ring(j));
                for (q, z) in modes.iter_mut().enumerate() {
                    *z *= self.msym[q];
                }
                self.inverse_into(modes, dst);
            });
        out
    }

    /// Solves (H + Ω²r²/4 + shift) x = b, one tridiagonal system per angular
    /// mode. The operator on the left is the magnetic kinetic operator, which
    /// is nonnegative, so the system is diagonally dominant for shift > 0.
    pub fn solve_shifted_magnetic(&self, b: &WaveField, omega: f64, shift: f64) -> WaveField {
        let nt = self.grid.n_theta;
        let nr = self.grid.n_r;
        let bface = self.boundary_face();
        let modes: Vec<Vec<Complex64>> = (0..nr)
            .into_par_iter()
            .map(|j| self.forward(b.ring(j)))
            .collect();
        let columns: Vec<Vec<Complex64>> = (0..nt)
            .into_par_iter()
            .map(|q| {
                let mut lower = vec![0.0; nr];
                let mut diag = vec![0.0; nr];
                let mut upper = vec![0.0; nr];
                let mut rhs: Vec<Complex64> = (0..nr).map(|j| modes[j][q]).collect();
                for j in 0..nr {
                    let w = self.weight(j);
                    let r = self.r[j];
                    let m = self.msym[q];
                    let d = m / r - omega * r / 2.0;
                    let ang = (self.kappa[q] - m * m) / (r * r) + d * d;
                    let mut dj = shift + ang;
                    if j + 1 < nr {
                        upper[j] = -self.face(j) / w;
                        dj += self.face(j) / w;
                    } else {
                        dj += bface / w;
                    }
                    if j > 0 {
                        lower[j] = -self.face(j - 1) / w;
                        dj += self.face(j - 1) / w;
                    }
                    diag[j] = dj;
                }
                thomas(&lower, &mut diag, &upper, &mut rhs);
                rhs
            })
            .collect();
        let mut out = WaveField::zeros(&self.grid);
        out.values
            .par_chunks_mut(nt)
            .enumerate()
            .for_each(|(j, dst)| {
                let m: Vec<Complex64> = (0..nt).map(|q| columns[q][j]).collect();
                self.inverse_into(m, dst);
            });
        out
    }
}

/// FFT bin to signed harmonic number; the Nyquist bin maps to +N/2.
pub fn mode_number(q: usize, n: usize) -> i64 {
    if 2 * q <= n {
        q as i64
    } else {
        q as i64 - n as i64
    }
}

/// In-place tridiagonal solve; `diag` is overwritten.
fn thomas(lower: &[f64], diag: &mut [f64], upper: &[f64], rhs: &mut [Complex64]) {
    let n = diag.len();
    let mut cp = vec![0.0; n];
    cp[0] = upper[0] / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - lower[i] * cp[i - 1];
        cp[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        let prev = rhs[i - 1];
        rhs[i] = (rhs[i] - lower[i] * prev) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= cp[i] * next;
    }
}

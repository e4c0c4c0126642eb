use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Sum with a fixed binary tree, independent of how the input was produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Complex amplitudes on the nodes of a [`GridSpec`], stored ring by ring.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(WaveField { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        WaveField {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn constant(grid: &GridSpec, value: Complex64) -> Self {
        WaveField {
            values: vec![value; grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(r, θ)` at every node.
    pub fn from_fn<F: Fn(f64, f64) -> Complex64 + Sync>(grid: &GridSpec, f: F) -> Self {
        let nt = grid.n_theta;
        let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
        values.par_chunks_mut(nt).enumerate().for_each(|(j, row)| {
            let r = grid.r_nodes[j];
            for (k, v) in row.iter_mut().enumerate() {
                *v = f(r, grid.theta_nodes[k]);
            }
        });
        WaveField {
            grid: grid.clone(),
            values,
        }
    }

    /// Independent standard complex Gaussian values at every node.
    pub fn random(grid: &GridSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        WaveField {
            grid: grid.clone(),
            values,
        }
    }

    /// A smooth random field: Gaussian coefficients on low angular modes
    /// times low-order radial polynomials, on top of a unit background.
    pub fn random_smooth(grid: &GridSpec, seed: u64, max_mode: i32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = Vec::new();
        for m in -max_mode..=max_mode {
            for p in 0..3 {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                coeffs.push((m, p, Complex64::new(re, im)));
            }
        }
        WaveField::from_fn(grid, |r, t| {
            let mut v = Complex64::new(1.0, 0.0);
            for &(m, p, c) in &coeffs {
                let radial = r.powi(m.abs() + 2 * p);
                v += c * radial * Complex64::from_polar(1.0, m as f64 * t);
            }
            v
        })
    }

    /// ‖ψ‖₂² with the grid quadrature.
    pub fn norm_sq(&self) -> f64 {
        self.ring_sums(|z| z.norm_sqr())
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// ∫ g(ψ) over the disc, reduced through the fixed pairwise tree.
    pub fn ring_sums<G: Fn(Complex64) -> f64 + Sync>(&self, g: G) -> f64 {
        let g = &g;
        let nt = self.grid.n_theta;
        let rings: Vec<f64> = self
            .values
            .par_chunks(nt)
            .enumerate()
            .map(|(j, row)| {
                let terms: Vec<f64> = row.iter().map(|&z| g(z)).collect();
                self.grid.weight(j) * pairwise_sum(&terms)
            })
            .collect();
        pairwise_sum(&rings)
    }

    /// Real inner product Re ∫ conj(self)·other.
    pub fn inner_re(&self, other: &WaveField) -> f64 {
        self.inner(other).re
    }

    /// Complex inner product ∫ conj(self)·other.
    pub fn inner(&self, other: &WaveField) -> Complex64 {
        let nt = self.grid.n_theta;
        let rings: Vec<(f64, f64)> = self
            .values
            .par_chunks(nt)
            .zip(other.values.par_chunks(nt))
            .enumerate()
            .map(|(j, (a, b))| {
                let prods: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x.conj() * y).collect();
                let re: Vec<f64> = prods.iter().map(|z| z.re).collect();
                let im: Vec<f64> = prods.iter().map(|z| z.im).collect();
                let w = self.grid.weight(j);
                (w * pairwise_sum(&re), w * pairwise_sum(&im))
            })
            .collect();
        let re: Vec<f64> = rings.iter().map(|p| p.0).collect();
        let im: Vec<f64> = rings.iter().map(|p| p.1).collect();
        Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
    }

    pub fn scale(&mut self, s: f64) {
        self.values.par_iter_mut().for_each(|v| *v *= s);
    }

    /// self ← self + a·other
    pub fn axpy(&mut self, a: f64, other: &WaveField) {
        self.values
            .par_iter_mut()
            .zip(other.values.par_iter())
            .for_each(|(x, y)| *x += a * y);
    }

    pub fn conj(&self) -> WaveField {
        WaveField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn ring(&self, j: usize) -> &[Complex64] {
        let nt = self.grid.n_theta;
        &self.values[j * nt..(j + 1) * nt]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

/// Rescales `field` to unit L² norm.
pub fn normalize(field: &WaveField) -> Result<WaveField> {
    let n = field.norm();
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::ZeroField);
    }
    let mut out = field.clone();
    out.scale(1.0 / n);
    Ok(out)
}

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "dirichlet" => Ok(BoundaryCondition::Dirichlet),
            other => Err(Error::InvalidParameter(format!(
                "unknown boundary condition {other:?}"
            ))),
        }
    }
}

/// Cell-centered polar grid on the unit disc.
///
/// Radial nodes sit at r_j = (j + ½)Δr, angular nodes at θ_k = 2πk/n_θ. The
/// quadrature weight of node (j, k) is r_j Δr Δθ, which sums to π exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_theta: usize,
    pub bc: BoundaryCondition,
    pub r_nodes: Vec<f64>,
    pub theta_nodes: Vec<f64>,
}

impl GridSpec {
    pub fn new(n_r: usize, n_theta: usize, bc: BoundaryCondition) -> Result<Self> {
        make_grid(n_r, n_theta, bc)
    }

    pub fn dr(&self) -> f64 {
        1.0 / self.n_r as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    pub fn len(&self) -> usize {
        self.n_r * self.n_theta
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.n_theta + k
    }

    /// Quadrature weight r_j Δr Δθ of every node on ring `j`.
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        self.r_nodes[j] * self.dr() * self.dtheta()
    }

    /// Cartesian position of node (j, k).
    pub fn position(&self, j: usize, k: usize) -> [f64; 2] {
        let (s, c) = self.theta_nodes[k].sin_cos();
        [self.r_nodes[j] * c, self.r_nodes[j] * s]
    }
}

pub fn make_grid(n_r: usize, n_theta: usize, bc: BoundaryCondition) -> Result<GridSpec> {
    if n_r < 16 || n_theta < 16 || !n_theta.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "grid needs n_r >= 16 and even n_theta >= 16, got {n_r} x {n_theta}"
        )));
    }
    let dr = 1.0 / n_r as f64;
    let dtheta = 2.0 * PI / n_theta as f64;
    Ok(GridSpec {
        n_r,
        n_theta,
        bc,
        r_nodes: (0..n_r).map(|j| (j as f64 + 0.5) * dr).collect(),
        theta_nodes: (0..n_theta).map(|k| k as f64 * dtheta).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_layout() {
        let g = GridSpec::new(16, 16, BoundaryCondition::Neumann).unwrap();
        assert_eq!(g.dr(), 1.0 / 16.0);
        assert_eq!(g.r_nodes[0], 1.0 / 32.0);
        assert!(g.r_nodes.iter().all(|&r| r > 0.0 && r < 1.0));
        let total: f64 = (0..g.n_r).map(|j| g.weight(j) * g.n_theta as f64).sum();
        assert!((total - PI).abs() < 1e-13);
    }

    #[test]
    fn size_limits() {
        assert!(GridSpec::new(256, 256, BoundaryCondition::Dirichlet).is_ok());
        assert!(GridSpec::new(8, 16, BoundaryCondition::Neumann).is_err());
        assert!(GridSpec::new(16, 17, BoundaryCondition::Neumann).is_err());
        assert!(GridSpec::new(16, 8, BoundaryCondition::Neumann).is_err());
    }
}

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::wavefield::WaveField;

/// A phase singularity found on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vortex {
    pub x: f64,
    pub y: f64,
    pub charge: i64,
}

/// Phase increment from `a` to `b`, in (−π, π].
fn phase_step(a: Complex64, b: Complex64) -> f64 {
    let d = (b * a.conj()).arg();
    if d <= -PI {
        d + 2.0 * PI
    } else {
        d
    }
}

fn winding(corners: &[Complex64]) -> i64 {
    let n = corners.len();
    let total: f64 = (0..n)
        .map(|i| phase_step(corners[i], corners[(i + 1) % n]))
        .sum();
    (total / (2.0 * PI)).round() as i64
}

/// Winding numbers of all grid plaquettes whose smallest |ψ| is at most
/// `threshold`.
///
/// Plaquettes join rings j, j+1 and angles k, k+1 (periodically). The disc
/// around the origin inside the first ring is one extra cell bounded by the
/// whole first ring.
pub fn detect_vortices(field: &WaveField, threshold: f64) -> Vec<Vortex> {
    let g = &field.grid;
    let nt = g.n_theta;
    let mut out = Vec::new();
    let ring0 = field.ring(0);
    if ring0.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min) <= threshold {
        let q = winding(ring0);
        if q != 0 {
            out.push(Vortex {
                x: 0.0,
                y: 0.0,
                charge: q,
            });
        }
    }
    for j in 0..g.n_r - 1 {
        let inner = field.ring(j);
        let outer = field.ring(j + 1);
        for k in 0..nt {
            let k1 = (k + 1) % nt;
            let corners = [inner[k], outer[k], outer[k1], inner[k1]];
            let min = corners
                .iter()
                .map(|z| z.norm())
                .fold(f64::INFINITY, f64::min);
            if min > threshold {
                continue;
            }
            let q = winding(&corners);
            if q != 0 {
                let r = 0.5 * (g.r_nodes[j] + g.r_nodes[j + 1]);
                let t = g.theta_nodes[k] + 0.5 * g.dtheta();
                out.push(Vortex {
                    x: r * t.cos(),
                    y: r * t.sin(),
                    charge: q,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{BoundaryCondition, GridSpec};

    #[test]
    fn central_vortex() {
        let g = GridSpec::new(32, 32, BoundaryCondition::Neumann).unwrap();
        let f = WaveField::from_fn(&g, Complex64::from_polar);
        let v = detect_vortices(&f, 10.0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].charge, 1);
        assert!(v[0].x.hypot(v[0].y) < 0.05);
    }

    #[test]
    fn constant_has_none() {
        let g = GridSpec::new(16, 16, BoundaryCondition::Neumann).unwrap();
        let f = WaveField::constant(&g, Complex64::new(0.5, 0.0));
        assert!(detect_vortices(&f, 10.0).is_empty());
    }

    #[test]
    fn off_center_antivortex() {
        let g = GridSpec::new(64, 64, BoundaryCondition::Neumann).unwrap();
        let (x0, y0) = (0.4, -0.2);
        let f = WaveField::from_fn(&g, |r, t| {
            Complex64::new(r * t.cos() - x0, -(r * t.sin() - y0))
        });
        let v = detect_vortices(&f, 10.0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].charge, -1);
        assert!((v[0].x - x0).hypot(v[0].y - y0) < 0.05);
    }

    #[test]
    fn threshold_skips_bright_plaquettes() {
        let g = GridSpec::new(32, 32, BoundaryCondition::Neumann).unwrap();
        let f = WaveField::from_fn(&g, |r, t| Complex64::from_polar(r + 1.0, t));
        assert!(detect_vortices(&f, 0.5).is_empty());
        assert_eq!(detect_vortices(&f, 2.0).len(), 1);
    }
}

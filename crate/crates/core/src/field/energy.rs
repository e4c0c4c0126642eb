use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ops::DiscOperator;
use super::wavefield::WaveField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyForm {
    /// ∫ |∇ψ|² − Ω ψ̄Lψ + |ψ|⁴/ε².
    AngularMomentum,
    /// ∫ |(∇ − iA)ψ|² − Ω²r²|ψ|²/4 + |ψ|⁴/ε².
    Magnetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    /// −Ω⟨L⟩ or −Ω²⟨r²⟩/4, depending on the form.
    pub rotation: f64,
    pub interaction: f64,
    pub total: f64,
    pub form: EnergyForm,
}

impl EnergyBreakdown {
    fn from_parts(kinetic: f64, rotation: f64, interaction: f64, form: EnergyForm) -> Self {
        EnergyBreakdown {
            kinetic,
            rotation,
            interaction,
            total: kinetic + rotation + interaction,
            form,
        }
    }
}

impl DiscOperator {
    /// Energy of `field` without the normalization check.
    pub fn energy(
        &self,
        field: &WaveField,
        omega: f64,
        eps: f64,
        form: EnergyForm,
    ) -> EnergyBreakdown {
        let t = self.terms(field, omega);
        let interaction = t.quartic / (eps * eps);
        match form {
            EnergyForm::AngularMomentum => {
                EnergyBreakdown::from_parts(t.radial + t.angular, -omega * t.lz, interaction, form)
            }
            EnergyForm::Magnetic => EnergyBreakdown::from_parts(
                t.radial + t.magnetic_angular,
                -omega * omega * t.second_moment / 4.0,
                interaction,
                form,
            ),
        }
    }
}

impl DiscOperator {
    /// E(new) − E(psi) evaluated from the increment δ = new − psi, which keeps
    /// its relative accuracy when the two energies agree to many digits.
    /// `h_psi` must be `apply_h(psi, omega)`.
    pub fn energy_difference(
        &self,
        psi: &WaveField,
        h_psi: &WaveField,
        new: &WaveField,
        omega: f64,
        eps: f64,
    ) -> f64 {
        let mut delta = new.clone();
        delta.axpy(-1.0, psi);
        let h_delta = self.apply_h(&delta, omega);
        let linear = 2.0 * h_psi.inner_re(&delta);
        let quadratic = delta.inner_re(&h_delta);
        let g = psi.grid.clone();
        let rows: Vec<f64> = (0..g.n_r)
            .map(|j| {
                let terms: Vec<f64> = psi
                    .ring(j)
                    .iter()
                    .zip(delta.ring(j))
                    .map(|(a, d)| {
                        let da = 2.0 * (a.conj() * d).re + d.norm_sqr();
                        let sum = 2.0 * a.norm_sqr() + da;
                        da * sum
                    })
                    .collect();
                g.weight(j) * super::pairwise_sum(&terms)
            })
            .collect();
        linear + quadratic + super::pairwise_sum(&rows) / (eps * eps)
    }
}

pub fn check_normalized(field: &WaveField) -> Result<()> {
    let norm = field.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::Unnormalized { norm });
    }
    Ok(())
}

/// Discrete GP energy of a normalized field.
pub fn gp_energy(
    field: &WaveField,
    omega: f64,
    eps: f64,
    form: EnergyForm,
) -> Result<EnergyBreakdown> {
    check_parameters(omega, eps)?;
    check_normalized(field)?;
    Ok(DiscOperator::new(&field.grid).energy(field, omega, eps, form))
}

fn check_parameters(omega: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need eps > 0 and finite omega, got eps = {eps}, omega = {omega}"
        )));
    }
    Ok(())
}

/// μ = E + ‖ψ‖₄⁴/ε².
pub fn chemical_potential(field: &WaveField, omega: f64, eps: f64) -> Result<f64> {
    let e = gp_energy(field, omega, eps, EnergyForm::AngularMomentum)?;
    Ok(e.total + e.interaction)
}

/// ⟨ψ, Lψ⟩ evaluated in real space, with its (roundoff-level) imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMomentum {
    pub value: f64,
    pub imaginary: f64,
}

pub fn angular_momentum_complex(field: &WaveField) -> Result<AngularMomentum> {
    check_normalized(field)?;
    let op = DiscOperator::new(&field.grid);
    let z: Complex64 = field.inner(&op.apply_l(field));
    Ok(AngularMomentum {
        value: z.re,
        imaginary: z.im,
    })
}

/// Re⟨ψ, Lψ⟩.
pub fn angular_momentum(field: &WaveField) -> Result<f64> {
    angular_momentum_complex(field).map(|a| a.value)
}

/// ∫ | |ψ|² − ρ(r) | over the disc.
pub fn l1_density_distance<F: Fn(f64) -> f64>(field: &WaveField, reference: F) -> f64 {
    let g = &field.grid;
    let rows: Vec<f64> = (0..g.n_r)
        .map(|j| {
            let rho = reference(g.r_nodes[j]);
            let d: Vec<f64> = field
                .ring(j)
                .iter()
                .map(|z| (z.norm_sqr() - rho).abs())
                .collect();
            g.weight(j) * super::pairwise_sum(&d)
        })
        .collect();
    super::pairwise_sum(&rows)
}

/// Energy in a trap of radius R of the dilated field ψ_R(x) = ψ(x/R)/R,
/// obtained from the unit disc by E_R(Ω) = E_1(ΩR²)/R².
///
/// The rotation term is scale invariant while the kinetic and interaction
/// terms pick up 1/R², so Ω has to be rescaled for the identity
/// R²·E_R = E_1 to hold term by term.
pub fn scaled_disc_energy(
    field: &WaveField,
    radius: f64,
    omega: f64,
    eps: f64,
    form: EnergyForm,
) -> Result<EnergyBreakdown> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let unit = gp_energy(field, omega * radius * radius, eps, form)?;
    let s = 1.0 / (radius * radius);
    Ok(EnergyBreakdown::from_parts(
        unit.kinetic * s,
        unit.rotation * s,
        unit.interaction * s,
        form,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{normalize, BoundaryCondition, GridSpec};
    use std::f64::consts::PI;

    fn constant(g: &GridSpec) -> WaveField {
        WaveField::constant(g, Complex64::new(1.0 / PI.sqrt(), 0.0))
    }

    #[test]
    fn constant_state_energy() {
        let g = GridSpec::new(32, 32, BoundaryCondition::Neumann).unwrap();
        let f = constant(&g);
        let e = gp_energy(&f, 0.0, 0.1, EnergyForm::AngularMomentum).unwrap();
        assert!((e.total - 100.0 / PI).abs() < 1e-11);
        let m = gp_energy(&f, 0.0, 0.1, EnergyForm::Magnetic).unwrap();
        assert!((m.total - 100.0 / PI).abs() < 1e-11);
        let mu = chemical_potential(&f, 0.0, 0.1).unwrap();
        assert!((mu - 200.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn magnetic_terms_cancel_for_real_constant() {
        let g = GridSpec::new(64, 64, BoundaryCondition::Neumann).unwrap();
        let f = constant(&g);
        let m = gp_energy(&f, 5.0, 0.1, EnergyForm::Magnetic).unwrap();
        assert!((m.kinetic + m.rotation).abs() < 1e-11);
        assert!((m.total - 100.0 / PI).abs() < 1e-10);
    }

    #[test]
    fn vortex_kinetic_energy() {
        // f = c r, ∫ (f'² + f²/r²) = 2π c² ∫ 2r dr = 2π c², c² = 2/π
        let g = GridSpec::new(256, 64, BoundaryCondition::Neumann).unwrap();
        let f = normalize(&WaveField::from_fn(&g, Complex64::from_polar)).unwrap();
        let e = gp_energy(&f, 0.0, 1.0, EnergyForm::AngularMomentum).unwrap();
        // the last half cell carries no gradient under Neumann, an O(Δr) deficit
        assert!((e.kinetic - 4.0).abs() < 1e-2, "{}", e.kinetic);
    }

    #[test]
    fn neumann_compatible_vortex_kinetic_energy() {
        // f = c(r − r³/3) has f'(1) = 0; c² = 36/(11π) and
        // ∫ (f'² + f²/r²) = 2π c² · 14/27 = 1008/297.
        let g = GridSpec::new(256, 64, BoundaryCondition::Neumann).unwrap();
        let f = normalize(&WaveField::from_fn(&g, |r, t| {
            Complex64::from_polar(r - r * r * r / 3.0, t)
        }))
        .unwrap();
        let e = gp_energy(&f, 0.0, 1.0, EnergyForm::AngularMomentum).unwrap();
        assert!((e.kinetic - 1008.0 / 297.0).abs() < 1e-4, "{}", e.kinetic);
    }

    #[test]
    fn angular_momentum_of_harmonics() {
        let g = GridSpec::new(32, 32, BoundaryCondition::Neumann).unwrap();
        assert!(angular_momentum(&constant(&g)).unwrap().abs() < 1e-14);
        for n in [-4i32, 1, 5] {
            let f = normalize(&WaveField::from_fn(&g, |r, t| {
                Complex64::from_polar(r.powi(n.abs()) + 0.1, n as f64 * t)
            }))
            .unwrap();
            let l = angular_momentum_complex(&f).unwrap();
            assert!((l.value - n as f64).abs() < 1e-10);
            assert!(l.imaginary.abs() < 1e-10);
        }
        let f = normalize(&WaveField::from_fn(&g, |_, t| {
            Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, 2.0 * t)
        }))
        .unwrap();
        assert!((angular_momentum(&f).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_is_rejected() {
        let g = GridSpec::new(16, 16, BoundaryCondition::Neumann).unwrap();
        let f = WaveField::constant(&g, Complex64::new(1.0, 0.0));
        assert!(matches!(
            gp_energy(&f, 0.0, 0.1, EnergyForm::Magnetic),
            Err(Error::Unnormalized { .. })
        ));
    }

    #[test]
    fn l1_distance_against_reference() {
        let g = GridSpec::new(64, 32, BoundaryCondition::Neumann).unwrap();
        let f = constant(&g);
        assert!(l1_density_distance(&f, |_| 1.0 / PI) < 1e-14);
        let tf = crate::tf::tf_solve(crate::tf::TfRegimeParams::Fixed { omega0: 4.0 }).unwrap();
        let d = l1_density_distance(&f, |r| tf.density(r));
        let rho = |r: f64| tf.density(r);
        let cross = (1.0 + (1.0 / PI - 2.0 / PI.sqrt()) / 2.0).sqrt();
        let oracle = crate::quadrature::CompositeRule::new(12, 64).integrate(
            &|r| 2.0 * PI * (1.0 / PI - rho(r)).abs() * r,
            &[0.0, tf.hole_radius.unwrap(), cross, 1.0],
        );
        assert!(d > 0.0);
        assert!((d - oracle).abs() < 1e-3, "{d} vs {oracle}");
    }

    #[test]
    fn radius_scaling_matches_dilated_grid() {
        let g = GridSpec::new(48, 48, BoundaryCondition::Dirichlet).unwrap();
        let f = normalize(&WaveField::random_smooth(&g, 2, 3)).unwrap();
        let (radius, omega, eps) = (2.5, 3.0, 0.2);
        let helper =
            scaled_disc_energy(&f, radius, omega, eps, EnergyForm::AngularMomentum).unwrap();
        let mut dilated = f.clone();
        dilated.scale(1.0 / radius);
        let direct = DiscOperator::with_radius(&g, radius).energy(
            &dilated,
            omega,
            eps,
            EnergyForm::AngularMomentum,
        );
        assert!((helper.total - direct.total).abs() < 1e-12 * direct.total.abs());
        let unit = gp_energy(
            &f,
            omega * radius * radius,
            eps,
            EnergyForm::AngularMomentum,
        )
        .unwrap();
        assert!((helper.total * radius * radius - unit.total).abs() < 1e-12 * unit.total.abs());
    }
}

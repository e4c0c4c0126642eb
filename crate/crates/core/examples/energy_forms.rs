//! The angular-momentum and magnetic forms of the discrete energy agree on
//! any field, and the rescaled-disc helper obeys R^2 E_R = E_1.
use flatdisc::field::{gp_energy, normalize, scaled_disc_energy};
use flatdisc::{BoundaryCondition, EnergyForm, GridSpec, WaveField};

fn main() -> flatdisc::Result<()> {
    let grid = GridSpec::new(128, 128, BoundaryCondition::Neumann)?;
    let psi = normalize(&WaveField::random_smooth(&grid, 7, 6))?;
    let (omega, eps) = (20.0, 0.1);

    let a = gp_energy(&psi, omega, eps, EnergyForm::AngularMomentum)?;
    let m = gp_energy(&psi, omega, eps, EnergyForm::Magnetic)?;
    println!(
        "angular:  kin {:>12.6} rot {:>12.6} int {:>10.6} total {:.10}",
        a.kinetic, a.rotation, a.interaction, a.total
    );
    println!(
        "magnetic: kin {:>12.6} rot {:>12.6} int {:>10.6} total {:.10}",
        m.kinetic, m.rotation, m.interaction, m.total
    );
    println!(
        "relative gap {:.2e}",
        (a.total - m.total).abs() / (1.0 + a.total.abs())
    );

    for radius in [0.5, 2.0] {
        let e = scaled_disc_energy(&psi, radius, omega, eps, EnergyForm::AngularMomentum)?;
        let unit = gp_energy(
            &psi,
            omega * radius * radius,
            eps,
            EnergyForm::AngularMomentum,
        )?;
        println!(
            "R = {radius}: R^2 E_R = {:.10}, E_1 = {:.10}",
            e.total * radius * radius,
            unit.total
        );
    }
    Ok(())
}

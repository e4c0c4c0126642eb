//! Lattice trial states at fixed Omega0 = 4: vortex count, winding and the
//! excess of the scaled energy over the Thomas-Fermi energy. The cores have
//! radius eps^eta and are not resolved by the grid.
use flatdisc::field::gp_energy;
use flatdisc::tf::tf_solve;
use flatdisc::trial::{build_lattice_trial, TrialSpec};
use flatdisc::{BoundaryCondition, EnergyForm, GridSpec};

fn main() -> flatdisc::Result<()> {
    let omega0 = 4.0;
    let e_tf = tf_solve(flatdisc::TfRegimeParams::Fixed { omega0 })?.energy;
    let grid = GridSpec::new(160, 384, BoundaryCondition::Neumann)?;
    for eps in [0.1, 0.07, 0.05] {
        let spec = TrialSpec::lattice(omega0, eps);
        let trial = build_lattice_trial(&spec, &grid)?;
        let e = gp_energy(
            &trial.field,
            spec.angular_velocity(),
            eps,
            EnergyForm::AngularMomentum,
        )?;
        let sites = trial.lattice.as_ref().map_or(0, |l| l.points.len());
        let excess = eps * eps * e.total - e_tf;
        println!(
            "eps {eps:4.2}  sites {sites:4}  winding {:?}  excess {excess:.4}  excess/(eps|log eps|) {:.3}",
            trial.winding,
            excess / (eps * eps.ln().abs()),
        );
    }
    Ok(())
}

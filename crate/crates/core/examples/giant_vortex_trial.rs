//! Giant-vortex trial in the fast regime Omega = Omega1 / eps^(2+2a).
use flatdisc::field::gp_energy;
use flatdisc::tf::tf_solve;
use flatdisc::trial::{build_giant_vortex_trial, TrialSpec};
use flatdisc::{BoundaryCondition, EnergyForm, GridSpec};

fn main() -> flatdisc::Result<()> {
    let (omega1, alpha) = (1.0, 1.0);
    let grid = GridSpec::new(256, 512, BoundaryCondition::Neumann)?;
    for eps in [0.3, 0.25, 0.2] {
        let spec = TrialSpec::giant(omega1, alpha, eps);
        let trial = build_giant_vortex_trial(&spec, &grid)?;
        let e = gp_energy(
            &trial.field,
            spec.angular_velocity(),
            eps,
            EnergyForm::AngularMomentum,
        )?;
        let e_tf = tf_solve(spec.tf_params())?.energy;
        let scaled = eps.powf(2.0 + 2.0 * alpha) * e.total;
        println!(
            "eps {eps:4.2}  Omega {:9.1}  winding {:?}  scaled {scaled:+.6}  E_tf {e_tf:+.6}  gap {:.3e}",
            spec.angular_velocity(),
            trial.winding,
            scaled - e_tf,
        );
    }
    Ok(())
}

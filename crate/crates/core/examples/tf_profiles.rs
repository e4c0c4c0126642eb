//! Thomas-Fermi densities below and above the hole threshold, and the
//! fast-rotation profile concentrating at the wall.
use flatdisc::tf::{giant_vortex_energy, tf_energy_quadrature, tf_solve};
use flatdisc::{TfRegimeParams, HOLE_THRESHOLD};

fn main() -> flatdisc::Result<()> {
    println!("hole threshold 4/sqrt(pi) = {HOLE_THRESHOLD:.6}");
    for omega0 in [0.5, 1.0, HOLE_THRESHOLD, 4.0, 8.0] {
        let s = tf_solve(TfRegimeParams::Fixed { omega0 })?;
        println!(
            "omega0 {omega0:6.3}  E {:+.8}  quad {:+.8}  hole {:.4}  rho(0) {:.4}  rho(1) {:.4}",
            s.energy,
            tf_energy_quadrature(&s)?,
            s.hole_radius.unwrap_or(0.0),
            s.density(0.0),
            s.density(1.0),
        );
    }

    // the fast regime pushes all mass into a layer of width ~ eps^(2a) at r = 1
    for eps in [0.1, 0.03, 0.01] {
        let s = tf_solve(TfRegimeParams::Fast {
            omega1: 1.0,
            alpha: 1.0,
            eps,
        })?;
        let gv = giant_vortex_energy(1.0, 1.0, eps)?;
        println!(
            "fast eps {eps:5.3}  inner radius {:.6}  <r^2> {:.6}  giant-vortex energy {:+.6}",
            s.support_inner_radius(),
            s.integrate(|rho, r| rho * r * r)?,
            gv.energy,
        );
    }
    Ok(())
}

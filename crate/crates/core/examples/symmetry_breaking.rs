//! Symmetric n-vortex energies against a 2D minimizer seeded from the best
//! symmetric state.
use flatdisc::minimize::{minimize, MinimizeOptions};
use flatdisc::symmetry::{
    anisotropy_index, instability_predicate, radial_minimize, symmetric_branch_energy,
};
use flatdisc::{BoundaryCondition, WaveField};

fn main() -> flatdisc::Result<()> {
    let eps: f64 = 0.05;
    let omega = 6.0 * eps.ln().abs() + 4.0;
    let n_r = 96;
    let branch = symmetric_branch_energy(eps, omega, 12, n_r)?;
    println!("Omega {omega:.3}");
    for e in &branch.table {
        let unstable = e.n >= 2 && instability_predicate(e.n, omega, eps)?;
        println!(
            "  n {:2}  E_n {:10.4}  restricted {:10.4}  unstable {unstable}",
            e.n, e.e_n, e.e_restricted
        );
    }
    println!(
        "best symmetric n = {} energy {:.4}",
        branch.best_n, branch.energy
    );

    let best = radial_minimize(branch.best_n, eps, omega, n_r)?;
    let sym = best.to_field(192, BoundaryCondition::Neumann)?;
    let kick = WaveField::random_smooth(&sym.grid, 1, 4);
    let mut start = sym.clone();
    start.axpy(1e-3, &kick);
    let start = flatdisc::field::normalize(&start)?;
    let res = minimize(&start, omega, eps, &MinimizeOptions::default())?;
    println!(
        "2D minimum {:.4} (gain {:.4}), anisotropy {:.3e}",
        res.energy.total,
        branch.energy - res.energy.total,
        anisotropy_index(&res.field)
    );
    Ok(())
}

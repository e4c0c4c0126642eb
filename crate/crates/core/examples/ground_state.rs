//! Minimize from a random start at Omega = 30, eps = 0.05 and report the
//! vortices of the result.
use flatdisc::field::detect_vortices;
use flatdisc::minimize::{minimize, random_initial, MinimizeOptions};
use flatdisc::symmetry::anisotropy_index;
use flatdisc::{BoundaryCondition, GridSpec};

fn main() -> flatdisc::Result<()> {
    let grid = GridSpec::new(96, 192, BoundaryCondition::Neumann)?;
    let (omega, eps) = (30.0, 0.05);
    let opts = MinimizeOptions {
        seed: 3,
        ..Default::default()
    };
    let start = random_initial(&grid, opts.seed);
    let res = minimize(&start, omega, eps, &opts)?;
    println!(
        "energy {:.6}  mu {:.6}  residual {:.2e}  iterations {}  converged {}",
        res.energy.total, res.mu, res.residual, res.iterations, res.converged
    );
    println!("anisotropy {:.3e}", anisotropy_index(&res.field));
    let vortices = detect_vortices(&res.field, 0.5 * res.field.max_abs());
    for v in vortices.iter().filter(|v| v.x.hypot(v.y) < 0.8) {
        println!("  vortex at ({:+.3}, {:+.3}) charge {}", v.x, v.y, v.charge);
    }
    Ok(())
}

//! Polar-grid discretization of the unit disc and the discrete GP energy.

mod energy;
mod grid;
mod io;
mod ops;
mod vortices;
mod wavefield;

pub use energy::{
    angular_momentum, angular_momentum_complex, check_normalized as energy_check_normalized,
    chemical_potential, gp_energy, l1_density_distance, scaled_disc_energy, AngularMomentum,
    EnergyBreakdown, EnergyForm,
};
pub use grid::{BoundaryCondition, GridSpec};
pub use io::{read_field, write_field, write_field_csv};
pub use ops::DiscOperator;
pub use vortices::{detect_vortices, Vortex};
pub use wavefield::{normalize, pairwise_sum, WaveField};

//! Closed-form occupancies, ponderomotive squeezing and cooling maps.

pub mod lossy;
pub mod map;
pub mod models;
pub mod occupancy;
pub mod ponderomotive;

pub use lossy::{bath_occupancy_lossy_cavity, bath_occupancy_lossy_cavity_at, LossyCavityBath};
pub use map::{cool_map, CoolMap};
pub use models::{ClosedForm, Langevin, OccupancyModel, OccupancyRegistry, StrongCoupling};
pub use occupancy::{
    bath_occupancy, bath_occupancy_at, bath_occupancy_pure, equilibrium_occupancy, sideband_limit, BathComponents,
    BathOccupancy, Branch,
};
pub use ponderomotive::{pond_squeezing, pond_squeezing_normalized, strong_coupling_estimate};

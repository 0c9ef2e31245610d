//! Model families: the pendulum-type chain, the reduced satellite, and
//! synthetic quasi-periodic flows used as oracles.

pub mod pendulum;
pub mod satellite;
pub mod synthetic;

pub use pendulum::{
    constraint_jacobian, constraint_values, pendulum_angular_momentum, pendulum_energy, pendulum_rhs,
    project_to_manifold, CartesianState, PendulumParams, PendulumSystem, Vec2, PENDULUM_DIM,
};
pub use satellite::{
    satellite_hamiltonian, satellite_rhs, SatelliteForm, SatelliteParams, SatelliteState, SatelliteSystem,
    SATELLITE_DIM, THETA_MIN,
};

//! Numerical detection of non-integrability by sections of long trajectories.
//!
//! Trajectories of a Hamiltonian system are integrated with a dense-output
//! Runge-Kutta scheme, mapped into a 4-dimensional reduced phase space and
//! intersected with 2-planes. On an invariant 2-torus such intersections are
//! isolated points; a clean curve in the section is a witness against
//! integrability.

pub mod classify;
pub mod error;
pub mod integrate;
pub mod io;
pub mod kamscan;
pub mod reduction;
pub mod sections;
pub mod systems;

pub use classify::{aggregate, classify, classify_confirmed, ClassifierConfig, Label, RunVerdict, Verdict};
pub use error::{Error, Result};
pub use integrate::{integrate_trajectory, Dopri5, IntegratorConfig, OdeSystem, TrajectorySummary};
pub use kamscan::{run_cell, scan, ScanCell, ScanConfig, ScanResult};
pub use reduction::{embed, reduce, wrap_angle, ReducedState};
pub use sections::{collect_sections, default_planes, PhaseMap, PlaneSpec, SectionCloud, SectionConfig};

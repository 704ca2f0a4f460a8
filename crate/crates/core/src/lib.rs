//! Left-invariant Riemannian and sub-Riemannian geometry on SE(3) and on the
//! space of positions and orientations SE(3)/SO(2).
//!
//! The crate is organised bottom-up:
//!
//! * [`se3`] – exact group and Lie-algebra arithmetic (exp/log, structure
//!   constants, adjoint and coadjoint actions, ZYZ Euler angles);
//! * [`metric`] – the legal diagonal metrics, their norms and projections,
//!   and checkers for Ad(H)-invariance and reductivity;
//! * [`flow`] – Hamiltonian geodesic flows in left-invariant coordinates with
//!   conservation diagnostics;
//! * [`shooting`] – geodesic distance by multi-start shooting, plus an
//!   independent discrete-energy oracle;
//! * [`sections`] – the quotient SE(3)/SO(2), fiber parametrisation and the
//!   three sections (closed-form, log-norm minimal, distance minimal);
//! * [`verify`] – seeded verification suites shared by the CLI.

pub mod error;
pub mod flow;
pub mod metric;
pub mod optim;
pub mod se3;
pub mod sections;
pub mod shooting;
pub mod tolerances;
pub mod verify;

pub use error::{GeoError, Result};
pub use flow::{PhaseState, Trajectory};
pub use metric::{MetricMode, MetricParams};
pub use se3::{AlgebraVector, EulerZYZ, RigidMotion, Rotation};
pub use sections::{CosetPoint, FiberSweep, SectionResult};
pub use shooting::{ShootingConfig, ShootingResult};

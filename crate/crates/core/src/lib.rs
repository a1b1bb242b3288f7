//! Minimum-length TDMA scheduling for full-duplex wireless-powered
//! communication networks.
//!
//! A hybrid access point (HAP) radiates energy continuously while users,
//! one slot at a time, push their data back on the uplink. Each user harvests
//! from the start of the frame until the end of its own slot, so the order in
//! which users transmit changes how much energy each has available and thus
//! how long its slot must be.
//!
//! The crate is organised bottom-up:
//!
//!  * [`model`]: harvesting rate, SINR gain, Shannon rate, minimum slot time
//!  * [`lambert`]: real branches of the Lambert W function
//!  * [`power`]: closed-form optimal power and slot duration for one user,
//!    fixed-order schedule evaluation, and a bisection cross-check
//!  * [`penalty`]: the penalty curve `rho(s) = e(s) - s - t_min`
//!  * [`sched`]: MPA, MTPA, FPA and BFA orderings plus fixed-order baselines
//!  * [`netgen`]: seeded random network realizations
//!  * [`instance`]: plain-text instance and schedule files

pub mod error;
pub mod instance;
pub mod lambert;
pub mod model;
pub mod netgen;
pub mod penalty;
pub mod power;
pub mod sched;

pub use error::{Error, Result};
pub use lambert::{lambert_w, Branch};
pub use model::{EhParams, SystemParams, UserProfile};
pub use netgen::{Realization, TopologyParams, UserTemplate};
pub use power::{Allocation, Link, StartState};
pub use sched::{Algorithm, Schedule, SearchCaps};

/// Absolute penalty (seconds) below which a user counts as transmitting at
/// full power. Shared by the penalty module and the schedulers.
pub const ZERO_PENALTY_TOL: f64 = 1e-12;

//! Transport-capacity (rate x distance) resource allocation for multi-device,
//! multi-subwindow THz links.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: spreading and molecular-absorption losses, SNR, rate.
//! * [`band`]: subwindow plans and absorption-coefficient tables.
//! * [`assignment`]: Hungarian and exhaustive one-to-one subwindow assignment.
//! * [`waterfill`]: distance-weighted water-filling for fixed distances.
//! * [`distance`]: optimal distance, operating regimes and the iterative
//!   distance-power fixed point.
//! * [`strategies`]: end-to-end allocation strategies and benchmarks.

pub mod assignment;
pub mod band;
pub mod channel;
pub mod config;
pub mod distance;
pub mod error;
pub mod search;
pub mod strategies;
pub mod units;
pub mod waterfill;

pub use assignment::{exhaustive_assign, hungarian_assign, Assignment, PayoffMatrix};
pub use band::{AbsorptionTable, BandPlan, Subwindow};
pub use channel::{Carrier, Link, LinkParams};
pub use config::{SolverConfig, Tolerance};
pub use distance::{DeviceLink, Regime, RegimeResult};
pub use error::{Error, Result};
pub use strategies::{Allocation, DeviceAllocation, DeviceSpec, Scenario};

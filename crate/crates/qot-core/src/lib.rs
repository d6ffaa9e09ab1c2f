//! Physical quantities, unit conventions, the WDM grid builder and the small
//! numerical kernels (quadrature, exponential integrals) shared by the rest of
//! the engine.
//!
//! Internal units: frequency in THz, power in mW, length in km, dispersion in
//! ps^n/km, nonlinearity in 1/(W km). Wavelengths only appear at I/O.

pub mod constellation;
pub mod dispersion;
pub mod error;
pub mod exec;
pub mod fiber;
pub mod grid;
pub mod link;
pub mod pumps;
pub mod quad;
pub mod special;
pub mod table;
pub mod units;

pub use constellation::{excess_kurtosis, Constellation};
pub use dispersion::{beta_to_dispersion, dispersion_to_beta};
pub use error::CoreError;
pub use exec::Exec;
pub use fiber::FiberSpec;
pub use grid::{build_channel_plan, BandGap, Channel, ChannelPlan, GridRequest};
pub use link::{Amplification, LinkConfig};
pub use pumps::{Direction, Pump, PumpSet};
pub use table::Table;

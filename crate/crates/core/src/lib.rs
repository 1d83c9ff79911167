//! Warranty cost analysis for repairable items whose on-times shrink and
//! repair times grow geometrically from cycle to cycle.
//!
//! Analytic quantities are evaluated on a uniform time grid with Stieltjes
//! convolutions; [`montecarlo`] provides an independent simulation of the
//! same processes and policies.

pub mod agp_analytic;
pub mod distributions;
pub mod error;
pub mod geometric_process;
pub mod grid;
pub mod montecarlo;
pub mod warranty;

pub use agp_analytic::{AgpAnalysis, SeriesTruncation, SeriesValue};
pub use distributions::{DistributionSpec, Family};
pub use error::{Error, Result};
pub use geometric_process::{AgpModel, GeometricProcess};
pub use grid::{Grid, GridFunction, GridKind};
pub use warranty::{CostParams, LifeCycleParams, WarrantyPolicy};
pub use montecarlo::{Estimate, Replication, SimConfig};

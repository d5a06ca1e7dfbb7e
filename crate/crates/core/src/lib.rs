//! Numerical laboratory for wiggle tracts and their half-plane models.

pub mod builder;
pub mod config;
pub mod covers;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod lm;
pub mod logpolar;
pub mod par;
pub mod projection;
pub mod quadrature;
pub mod strip;
pub mod tract;
pub mod verify;

pub use config::Config;
pub use covers::{minimal_covers, IntervalFamily, Quadruple};
pub use error::{Error, Result};
pub use kernel::{build_map, build_map_from, KernelConfig, MapKernel};
pub use logpolar::LogPolar;
pub use tract::WiggleSpec;
pub use projection::{build_projection, PiecewiseMonotoneMap};

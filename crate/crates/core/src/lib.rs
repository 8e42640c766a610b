//! Kadanoff sandpile model KSPM(p): stabilization of `N` grains stacked on
//! column 0, the shot-vector dynamics that reconstruct the fixed point left
//! to right, the linear algebra behind its convergence to a wave pattern,
//! and structural analysis of the resulting fixed points.

pub mod analyzer;
pub mod cli;
pub mod dds;
pub mod model;
pub mod spectral;
pub mod stabilizer;

pub use model::{HeightConfig, ModelError, Params, SlopeConfig};
pub use stabilizer::{stabilize, Avalanche, FixedPoint, Strategy};

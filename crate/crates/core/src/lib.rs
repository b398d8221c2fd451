//! Transfer-operator numerics for sequential circle maps: equivariant
//! density families, loss-of-memory rates and first-order linear response
//! for expanding maps with post-composition kicks and for random maps with
//! additive noise.

pub mod error;
pub mod grid;
pub mod maps;
pub mod constants;
pub mod noise;
pub mod response;
pub mod sequence;
pub mod transfer;

pub use error::{Error, Result};
pub use grid::DensityGrid;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

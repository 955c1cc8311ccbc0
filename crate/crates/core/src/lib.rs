//! Thick off-lattice random walks sampled by reflection moves, with size and
//! knotting analysis of the resulting ensembles.

pub mod campaign;
pub mod error;
pub mod geom;
pub mod io;
pub mod knots;
pub mod sampler;
pub mod stats;
pub mod thickness;

pub use error::{Error, Result};
pub use geom::{Plane, Vec3, Walk};
pub use sampler::{Chain, ChainConfig, ChainStats};
pub use thickness::ThicknessParams;

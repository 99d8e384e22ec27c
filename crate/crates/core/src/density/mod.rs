//! Piecewise-smooth joint densities over the latent coordinates of a graph.

mod dist;
mod error;
mod node;
mod piecewise;
mod tape;

pub use dist::{logpdf_normal, logpdf_uniform, DistParamError, HALF_LN_2PI};
pub use error::DensityError;
pub use node::Node;
pub use piecewise::{
    build_density, build_density_with_cap, PiecewiseDensity, Region, RegionKey, DEFAULT_REGION_CAP,
};
pub use tape::{Op, Slot, Tape};

pub mod energy;
pub mod error;
pub mod geom;
pub mod kernel;
pub mod optimize;
pub mod potential;
mod quad;
pub mod stationarity;
pub mod symmflow;
pub mod variation;

pub use error::{Error, Result};
pub use quad::pairwise_sum;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/polygons.md")]
    mod polygons {}
    #[doc = include_str!("../../../book/src/potential.md")]
    mod potential {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/stationarity.md")]
    mod stationarity {}
    #[doc = include_str!("../../../book/src/variations.md")]
    mod variations {}
    #[doc = include_str!("../../../book/src/symmetrization.md")]
    mod symmetrization {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

//! Volumetric single-image super-resolution trained as a three-player GAN:
//! an RRDB generator, a relativistic critic and a concurrently trained
//! feature extractor, with annealed instance noise on the critic inputs.

pub mod autodiff;
pub mod convergence_lab;
pub mod error;
pub mod losses;
pub mod metrics;
pub mod networks;
pub mod trainer;
pub mod volume_io;

pub use autodiff::{Graph, NodeId, Scalar, Tensor};
pub use error::{Error, Result};
pub use volume_io::{PatchGrid, Volume};

//! Photoacoustic tomography with circular integrating detectors on a sphere.
//!
//! Detectors are great circles of the sphere of radius `r_det`; each one
//! reports the circle average P(θ̂, t) of the acoustic pressure. The
//! reconstruction inverts the Funk transform per time slice to recover the
//! boundary pressure and then backprojects it over spheres.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod forward;
pub mod funkmink;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod phantom;
pub mod quad;
pub mod radon2d;
pub mod range;
pub mod recon;
pub mod specfun;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use funkmink::{Axis, FunkInversionParams, FunkInverter, GnomonicChart};
pub use geometry::Vec3;
pub use grid::{
    DataKind, DetectorData, SphereFunction, SphereGrid, SphereInterpolator, SphereTimeGrid,
    VolumeGrid, VolumeSpec,
};
pub use phantom::{BallComponent, BallKind, PhantomSpec};
pub use radon2d::{PlaneGrid, PlaneSpec, Sinogram2D, SinogramSpec};
pub use range::RangeReport;
pub use recon::{ReconParams, Reconstruction};

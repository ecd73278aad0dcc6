//! CPU library for fitting and rendering unnormalized mixtures of signed 3D
//! Student's t components.
//!
//! The pipeline mirrors the usual splatting stack: components are projected
//! onto the image plane with a linearized perspective map, composited
//! front-to-back with signed opacities (negative components subtract color,
//! "scooping"), and trained from images with an analytic backward pass. The
//! position parameters are sampled with a gated SGHMC scheme; everything else
//! uses Adam. Near-transparent components are recycled onto live ones with a
//! mass-preserving covariance correction.
//!
//! Modules follow the data flow:
//! - [`mixture`]: component/mixture/camera data model and parameter maps
//! - [`tmath`]: closed-form Student's t math (densities, projection, cutoffs)
//! - [`sh`]: spherical-harmonic color evaluation
//! - [`render`]: tiled forward rasterizer
//! - [`gradients`]: analytic backward pass
//! - [`loss`]: training objective and image metrics
//! - [`sghmc`]: gated SGHMC position sampler plus Adam for the rest
//! - [`lifecycle`]: dead-component detection, recycling, growth
//! - [`scene`]: scene/image/point-cloud I/O
//! - [`trainer`]: training loop, checkpoints, evaluation
//! - [`oracles`]: brute-force references (quadrature, finite differences,
//!   untiled compositing) used by the verification suites

pub mod error;
pub mod gradients;
pub mod lifecycle;
pub mod loss;
pub mod mixture;
pub mod oracles;
pub mod render;
pub mod scene;
pub mod sghmc;
pub mod sh;
pub mod threads;
pub mod tmath;
pub mod trainer;

pub use error::{Error, Result};
pub use mixture::{Camera, Mixture, TComponent, TrainConfig};

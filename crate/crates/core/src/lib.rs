//! Eccentricity maps: a per-pixel, recursively updated measure of how far each
//! pixel of an image stream departs from its own recent history.
//!
//! * [`ecc`]: scalar/vector eccentricity with infinite and finite memory.
//! * [`engine`]: per-pixel state grid producing the map bundle for each frame.
//! * [`frameio`]: frame sources, PGM/PPM sinks and float dumps.
//! * [`eval`]: segmentation scoring and throughput benchmarking.
//! * [`selftest`]: randomized property checks of the core recursion.

pub mod ecc;
pub mod engine;
pub mod eval;
pub mod frame;
pub mod frameio;
pub mod raster;
pub mod selftest;
pub mod synth;

pub use ecc::{EccParams, EccValues, StreamState};
pub use engine::{MapBundle, MapKind, Pipeline, StateGrid};
pub use frame::{Frame, FrameDims, FrameView};
pub use raster::{Mask, Raster};

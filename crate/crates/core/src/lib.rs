//! Weighted Radon transforms on limited angular ranges, filtered backprojection
//! with general Fourier-multiplier filters, and a sampled microlocal calculus
//! that predicts which singularities a reconstruction keeps and which artifacts
//! it adds.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: vectors, directions, angular sets and covectors.
//! * [`phantoms`]: analytic test objects and weight fields.
//! * [`transform`]: images, sinograms, forward projection and backprojection.
//! * [`filters`]: filter symbols and smooth angular cutoff windows.
//! * [`microlocal`]: canonical relation, visible sets, artifacts and symbols.
//! * [`wfdetect`]: structure-tensor singularity detection and metrics.
//! * [`pfg`]: the portable float-grid file format and CSV writers.

pub mod error;
pub mod filters;
pub mod geometry;
pub mod microlocal;
pub mod pfg;
pub mod phantoms;
pub mod transform;
pub mod wfdetect;

pub use error::{Error, Result};

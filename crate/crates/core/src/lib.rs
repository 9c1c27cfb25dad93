//! Free-space path-loss models for links assisted by a reconfigurable
//! intelligent surface (RIS).
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: coordinate frame, unit-cell lattice and per-cell link
//!   distances / direction cosines.
//! - [`patterns`]: normalized power radiation patterns of the terminals and
//!   unit cells, and the joint angle-dependent factor.
//! - [`configuration`]: per-cell reflection coefficients (uniform, stripe,
//!   co-phased focusing, 1-bit quantization).
//! - [`engine`]: received power / path loss for the general and closed-form
//!   models, and angle/distance sweeps.
//! - [`campaign`]: calibration arithmetic, measurement ingestion,
//!   model-vs-measurement comparison and per-cell SPA metrics.
//!
//! All internal quantities are SI (meters, hertz, watts, radians). Decibel
//! and degree conversions live in [`units`] and are applied only at I/O
//! boundaries.

pub mod campaign;
pub mod configuration;
pub mod engine;
mod error;
pub mod geometry;
pub mod patterns;
pub mod units;

pub use error::{Error, Result};

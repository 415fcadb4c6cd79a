//! Deterministic site-specific radio ray tracing.

pub use num_complex::{Complex32, Complex64};

pub mod channel;
pub mod cli;
pub mod config;
pub mod coverage;
pub mod devices;
pub mod em;
pub mod geometry;
pub mod package;
pub mod pipeline;
pub mod ray;
pub mod scene;

//! Transmitters, receivers, antenna arrays and reconfigurable surfaces.

mod antenna;
mod ris;
mod terminal;

pub use antenna::{array_response, array_response_towards, AntennaArray};
pub use ris::{
    apply_ris_to_path, ris_array_factor, ris_multibeam_optimize, ris_multibeam_optimize_traced, ris_single_beam_profile, single_beam_phase, BeamTarget,
    RisPanel,
};
pub use terminal::{dbm_to_watts, doppler_shift, Terminal};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("optimization failed: {0}")]
    OptimizationFailure(String),
}

//! Ray launching, BVH acceleration and path search.

mod bvh;
mod dump;
mod edges;
mod receivers;
mod sampling;
mod trace;

pub use bvh::{build_bvh, Bvh, Hit, MAX_LEAF_SIZE};
pub use dump::{read_path_csv, write_path_csv, PathRow, PATH_CSV_HEADER};
pub use edges::{find_edges, Edge};
pub use receivers::ReceiverIndex;
pub use sampling::{biased_directions, fibonacci_directions};
pub use trace::{trace_paths, TraceParams, TraceScene, TraceStats, T_MIN};

use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

use crate::geometry::{to_az_el, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RayError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InteractionKind {
    Reflection,
    Transmission,
    Diffraction,
    /// Re-radiation by a reconfigurable surface.
    Ris,
}

impl InteractionKind {
    pub fn label(self) -> &'static str {
        match self {
            InteractionKind::Reflection => "R",
            InteractionKind::Transmission => "T",
            InteractionKind::Diffraction => "D",
            InteractionKind::Ris => "S",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Some(match s {
            "R" => InteractionKind::Reflection,
            "T" => InteractionKind::Transmission,
            "D" => InteractionKind::Diffraction,
            "S" => InteractionKind::Ris,
            _ => return None,
        })
    }
}

impl fmt::Display for InteractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One logged interaction along a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionEvent {
    pub kind: InteractionKind,
    pub point: Vec3,
    /// Scene object index; for [`InteractionKind::Ris`] the panel index.
    pub object: usize,
    /// Triangle id for reflection/transmission, edge id for diffraction,
    /// panel index for RIS.
    pub element: u32,
    /// Radians in [0, π/2] from the surface normal. For diffraction, the
    /// angle between the incident ray and the edge normal plane.
    pub incident_angle: f64,
    /// Length of the segment arriving at this point, metres.
    pub segment_length: f64,
    /// Power arriving at this point, watts.
    pub power_w: f64,
}

/// Early-termination bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminationPolicy {
    pub max_interactions: u32,
    pub min_power_w: f64,
}

impl TerminationPolicy {
    pub fn new(max_interactions: u32, min_power_w: f64) -> Result<Self, RayError> {
        let p = TerminationPolicy {
            max_interactions,
            min_power_w,
        };
        p.validate()?;
        Ok(p)
    }

    /// Line-of-sight only tracing (no interactions at all).
    pub fn line_of_sight(min_power_w: f64) -> Result<Self, RayError> {
        if !(min_power_w > 0.0) {
            return Err(RayError::InvalidArgument("min_power must be positive".into()));
        }
        Ok(TerminationPolicy {
            max_interactions: 0,
            min_power_w,
        })
    }

    pub fn validate(&self) -> Result<(), RayError> {
        if self.max_interactions < 1 {
            return Err(RayError::InvalidArgument("max_interactions must be at least 1".into()));
        }
        if !(self.min_power_w > 0.0) || !self.min_power_w.is_finite() {
            return Err(RayError::InvalidArgument("min_power must be positive and finite".into()));
        }
        Ok(())
    }
}

/// A ray in flight during the launch phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub accumulated_length: f64,
    pub amplitude: Complex64,
    pub interaction_count: usize,
    pub interaction_log: Vec<InteractionEvent>,
}

impl Ray {
    pub fn new(origin: Vec3, direction: Vec3) -> Result<Self, RayError> {
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(RayError::InvalidArgument("ray direction must be non-zero".into()));
        }
        Ok(Ray {
            origin,
            direction: direction / n,
            accumulated_length: 0.0,
            amplitude: Complex64::new(1.0, 0.0),
            interaction_count: 0,
            interaction_log: Vec::new(),
        })
    }

    pub fn push(&mut self, event: InteractionEvent) {
        self.interaction_log.push(event);
        self.interaction_count = self.interaction_log.len();
    }
}

/// Deduplication key entry: kind, object and (for diffraction) the edge.
pub type SignatureItem = (InteractionKind, usize, u32);

/// A traced multipath component from one transmitter to one receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub receiver: usize,
    /// Complex path gain normalised so a 1 m free-space path has magnitude λ/4π.
    pub gain: Complex64,
    /// Full-polarisation transfer: entry (i, j) maps transmit basis j to
    /// receive basis i, with (θ̂, φ̂) bases of the departure and arrival
    /// directions. Same normalisation as `gain`.
    pub jones: [[Complex64; 2]; 2],
    pub delay: f64,
    pub length: f64,
    pub tx: Vec3,
    pub rx: Vec3,
    /// Unit propagation direction leaving the transmitter.
    pub departure: Vec3,
    /// Unit propagation direction arriving at the receiver.
    pub arrival: Vec3,
    pub doppler_hz: f64,
    pub interactions: Vec<InteractionEvent>,
}

impl PathRecord {
    pub fn interaction_count(&self) -> usize {
        self.interactions.len()
    }

    pub fn signature(&self) -> Vec<SignatureItem> {
        self.interactions
            .iter()
            .map(|e| {
                let feature = if e.kind == InteractionKind::Diffraction { e.element } else { 0 };
                (e.kind, e.object, feature)
            })
            .collect()
    }

    /// tx, interaction points in order, rx.
    pub fn vertices(&self) -> Vec<Vec3> {
        let mut v = Vec::with_capacity(self.interactions.len() + 2);
        v.push(self.tx);
        v.extend(self.interactions.iter().map(|e| e.point));
        v.push(self.rx);
        v
    }

    /// Angle of departure (azimuth, elevation).
    pub fn aod(&self) -> (f64, f64) {
        to_az_el(&self.departure)
    }

    /// Angle of arrival (azimuth, elevation), pointing back towards the source.
    pub fn aoa(&self) -> (f64, f64) {
        to_az_el(&-self.arrival)
    }

    pub fn phase(&self) -> f64 {
        self.gain.arg()
    }

    pub fn path_loss_db(&self) -> f64 {
        -20.0 * self.gain.norm().log10()
    }
}

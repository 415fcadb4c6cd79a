use super::{AntennaArray, DeviceError};
use crate::geometry::{heading_tilt_rotation, Vec3};
use crate::scene::Scene;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// A base station or mobile terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Terminal {
    pub id: String,
    pub position: Vec3,
    /// Radians, about +z from +x.
    pub heading: f64,
    /// Radians, downward.
    pub tilt: f64,
    pub tx_power_dbm: f64,
    pub array: AntennaArray,
    pub velocity: Vec3,
}

impl Terminal {
    /// A static single-element terminal at `position`.
    pub fn new(id: impl Into<String>, position: Vec3, tx_power_dbm: f64) -> Self {
        Terminal {
            id: id.into(),
            position,
            heading: 0.0,
            tilt: 0.0,
            tx_power_dbm,
            array: AntennaArray::single(),
            velocity: Vec3::zeros(),
        }
    }

    /// The array with this terminal's heading and tilt applied.
    pub fn oriented_array(&self) -> AntennaArray {
        self.array.clone().oriented(heading_tilt_rotation(self.heading, self.tilt))
    }

    pub fn tx_power_w(&self) -> f64 {
        dbm_to_watts(self.tx_power_dbm)
    }

    pub fn validate(&self, scene: &Scene) -> Result<(), DeviceError> {
        if self.id.is_empty() {
            return Err(DeviceError::InvalidArgument("terminal id is empty".into()));
        }
        if !self.tx_power_dbm.is_finite() {
            return Err(DeviceError::InvalidArgument(format!("terminal {}: transmit power is not finite", self.id)));
        }
        if !self.position.iter().chain(self.velocity.iter()).all(|c| c.is_finite()) {
            return Err(DeviceError::InvalidArgument(format!("terminal {}: non-finite position or velocity", self.id)));
        }
        self.array
            .validate()
            .map_err(|e| DeviceError::InvalidArgument(format!("terminal {}: {e}", self.id)))?;
        if !scene.contains(&self.position) {
            return Err(DeviceError::InvalidArgument(format!(
                "terminal {} at ({}, {}, {}) lies outside the scene bounds",
                self.id, self.position.x, self.position.y, self.position.z
            )));
        }
        Ok(())
    }
}

/// Doppler shift in Hz for a path leaving the transmitter along `k_dep` and
/// reaching the receiver along `k_arr` (both propagation directions).
///
/// Positive when the path is shortening: `(v_tx·k̂_dep − v_rx·k̂_arr)/λ`.
pub fn doppler_shift(k_dep: &Vec3, k_arr: &Vec3, v_tx: &Vec3, v_rx: &Vec3, wavelength: f64) -> f64 {
    (v_tx.dot(k_dep) - v_rx.dot(k_arr)) / wavelength
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_is_zero() {
        let k = Vec3::x();
        assert_eq!(doppler_shift(&k, &k, &Vec3::zeros(), &Vec3::zeros(), 0.1), 0.0);
    }

    #[test]
    fn approaching_receiver() {
        // tx at origin, rx on +x moving back towards it.
        let k = Vec3::x();
        let f = doppler_shift(&k, &k, &Vec3::zeros(), &Vec3::new(-3.0, 0.0, 0.0), 0.1);
        assert!((f - 30.0).abs() < 1e-12);
    }

    #[test]
    fn perpendicular_motion() {
        let k = Vec3::x();
        assert_eq!(doppler_shift(&k, &k, &Vec3::zeros(), &Vec3::new(0.0, 3.0, 0.0), 0.1), 0.0);
    }

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
    }
}

use num_complex::Complex64;
use std::f64::consts::PI;

use super::DeviceError;
use crate::geometry::{from_az_el, Mat3, Vec3};

/// Uniform planar array of isotropic elements.
///
/// Element (r, c) sits at local offset `(0, c·spacing_h, r·spacing_v)`, so
/// with the identity orientation the array lies in the yz-plane and faces +x.
/// Elements are numbered row-major: `m = r·cols + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaArray {
    pub rows: usize,
    pub cols: usize,
    pub spacing_v: f64,
    pub spacing_h: f64,
    pub orientation: Mat3,
}

impl AntennaArray {
    pub fn new(rows: usize, cols: usize, spacing_v: f64, spacing_h: f64) -> Result<Self, DeviceError> {
        let a = AntennaArray {
            rows,
            cols,
            spacing_v,
            spacing_h,
            orientation: Mat3::identity(),
        };
        a.validate()?;
        Ok(a)
    }

    pub fn single() -> Self {
        AntennaArray {
            rows: 1,
            cols: 1,
            spacing_v: 0.5,
            spacing_h: 0.5,
            orientation: Mat3::identity(),
        }
    }

    pub fn oriented(mut self, rotation: Mat3) -> Self {
        self.orientation = rotation;
        self
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(DeviceError::InvalidArgument("array needs at least one row and one column".into()));
        }
        if !(self.spacing_v > 0.0 && self.spacing_h > 0.0) {
            return Err(DeviceError::InvalidArgument("element spacing must be positive".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Element offsets in the global frame, relative to the array origin.
    pub fn element_offsets(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.len());
        for r in 0..self.rows {
            for c in 0..self.cols {
                let local = Vec3::new(0.0, c as f64 * self.spacing_h, r as f64 * self.spacing_v);
                out.push(self.orientation * local);
            }
        }
        out
    }
}

/// Steering vector for the direction with azimuth `az` and elevation `el`.
pub fn array_response(array: &AntennaArray, az: f64, el: f64, wavelength: f64) -> Vec<Complex64> {
    array_response_towards(array, &from_az_el(az, el), wavelength)
}

/// Steering vector `e^{j(2π/λ) k̂·r_m}` for a unit direction `k̂`.
pub fn array_response_towards(array: &AntennaArray, dir: &Vec3, wavelength: f64) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength;
    array
        .element_offsets()
        .iter()
        .map(|r| Complex64::from_polar(1.0, k * dir.dot(r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn single_element() {
        let a = AntennaArray::new(1, 1, 0.05, 0.05).unwrap();
        assert_eq!(array_response(&a, 0.3, 0.2, 0.1), vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn broadside_and_endfire() {
        let lam = 0.1;
        let a = AntennaArray::new(2, 1, lam / 2.0, lam / 2.0).unwrap();
        let b = array_response(&a, 0.0, 0.0, lam);
        assert!((b[0] - 1.0).norm() < 1e-12 && (b[1] - 1.0).norm() < 1e-12);
        let e = array_response(&a, 0.0, FRAC_PI_2, lam);
        assert!((e[0] - 1.0).norm() < 1e-12 && (e[1] + 1.0).norm() < 1e-12);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(AntennaArray::new(0, 2, 0.1, 0.1).is_err());
        assert!(AntennaArray::new(2, 2, 0.0, 0.1).is_err());
    }
}

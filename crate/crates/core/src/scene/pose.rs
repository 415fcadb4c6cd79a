use super::SceneError;
use crate::geometry::{Mat3, Vec3};

/// Rigid transform from a sensor's local frame into the global frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Mat3,
    translation: Vec3,
}

const ORTHO_TOL: f64 = 1e-9;

impl Pose {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self, SceneError> {
        let err = (rotation.transpose() * rotation - Mat3::identity()).abs().max();
        if !(err <= ORTHO_TOL) {
            return Err(SceneError::InvalidPose(format!(
                "rotation is not orthonormal (max |RᵀR − I| = {err:e})"
            )));
        }
        let det = rotation.determinant();
        if !((det - 1.0).abs() <= ORTHO_TOL) {
            return Err(SceneError::InvalidPose(format!("rotation determinant is {det}, expected +1")));
        }
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(SceneError::InvalidPose("translation is not finite".into()));
        }
        Ok(Pose { rotation, translation })
    }

    pub fn identity() -> Self {
        Pose {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

/// Maps points from the local frame to the global frame: `R p + t`.
pub fn transform_points(points: &[Vec3], pose: &Pose) -> Vec<Vec3> {
    points.iter().map(|p| pose.apply(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_pose() {
        let out = transform_points(&[Vec3::new(1.0, 2.0, 3.0)], &Pose::identity());
        assert_eq!(out[0], Vec3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn quarter_turn_about_z() {
        let r = *Rotation3::from_axis_angle(&Vec3::z_axis(), FRAC_PI_2).matrix();
        let pose = Pose::new(r, Vec3::zeros()).unwrap();
        let out = transform_points(&[Vec3::x()], &pose);
        assert!((out[0] - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_orthonormal() {
        let mut r = Mat3::identity();
        r[(0, 0)] = 1.1;
        assert!(matches!(Pose::new(r, Vec3::zeros()), Err(SceneError::InvalidPose(_))));
        let reflection = Mat3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(Pose::new(reflection, Vec3::zeros()).is_err());
    }

    proptest! {
        #[test]
        fn transform_is_isometry(
            axis in prop::array::uniform3(-1.0f64..1.0),
            angle in -3.2f64..3.2,
            t in prop::array::uniform3(-100.0f64..100.0),
            pts in prop::collection::vec(prop::array::uniform3(-50.0f64..50.0), 100),
        ) {
            let axis = Vec3::from(axis);
            prop_assume!(axis.norm() > 1e-3);
            let r = *Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).matrix();
            let pose = Pose::new(r, Vec3::from(t)).unwrap();
            let local: Vec<Vec3> = pts.into_iter().map(Vec3::from).collect();
            let global = transform_points(&local, &pose);
            for i in 0..local.len() {
                for j in (i + 1)..local.len() {
                    let dl = (local[i] - local[j]).norm();
                    let dg = (global[i] - global[j]).norm();
                    prop_assert!((dl - dg).abs() < 1e-9);
                }
            }
        }
    }
}

use proptest::prelude::*;
use raytwin::devices::*;
use raytwin::geometry::{from_az_el, Mat3, Vec3};
use std::f64::consts::PI;

const LAM: f64 = 0.1;

fn panel(rows: usize, cols: usize) -> RisPanel {
    RisPanel::new("ris", rows, cols, LAM / 2.0, Vec3::zeros(), Mat3::identity()).unwrap()
}

fn target(theta: f64, phi: f64, level: f64) -> BeamTarget {
    BeamTarget { theta, phi, weight: 1.0, level }
}

proptest! {
    #[test]
    fn array_response_norm_is_element_count(
        rows in 1usize..9,
        cols in 1usize..9,
        sv in 0.01f64..0.3,
        sh in 0.01f64..0.3,
        az in -PI..PI,
        el in -PI / 2.0..PI / 2.0,
    ) {
        let a = AntennaArray::new(rows, cols, sv, sh).unwrap();
        let norm2: f64 = array_response(&a, az, el, LAM).iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((norm2 - (rows * cols) as f64).abs() < 1e-9);
    }

    #[test]
    fn doppler_negates_when_propagation_reverses(
        kd in prop::array::uniform3(-1.0f64..1.0),
        ka in prop::array::uniform3(-1.0f64..1.0),
        vt in prop::array::uniform3(-30.0f64..30.0),
        vr in prop::array::uniform3(-30.0f64..30.0),
    ) {
        let (kd, ka) = (Vec3::from(kd), Vec3::from(ka));
        prop_assume!(kd.norm() > 1e-3 && ka.norm() > 1e-3);
        let (kd, ka, vt, vr) = (kd.normalize(), ka.normalize(), Vec3::from(vt), Vec3::from(vr));
        let f = doppler_shift(&kd, &ka, &vt, &vr, LAM);
        // Velocities stay with their terminals, propagation reversed.
        prop_assert!((f + doppler_shift(&-kd, &-ka, &vt, &vr, LAM)).abs() < 1e-9);
        // Full role swap: the path length changes at the same rate.
        prop_assert!((f - doppler_shift(&-ka, &-kd, &vr, &vt, LAM)).abs() < 1e-9);
    }
}

#[test]
fn approaching_receiver_is_positive() {
    let f = doppler_shift(&Vec3::x(), &Vec3::x(), &Vec3::zeros(), &Vec3::new(-3.0, 0.0, 0.0), LAM);
    assert!((f - 30.0).abs() < 1e-12);
}

#[test]
fn single_beam_argmax_on_one_degree_grid() {
    let p = panel(32, 32);
    for (t0, f0) in [(30.0f64, 45.0f64), (20.0, 200.0), (55.0, 300.0)] {
        let (t0r, f0r) = (t0.to_radians(), f0.to_radians());
        let ph = ris_single_beam_profile(&p, t0r, f0r, LAM);
        let peak = ris_array_factor(&p, &ph, t0r, f0r, LAM).norm();
        assert!((peak - 1024.0).abs() < 1e-9, "peak {peak}");
        let mut best = (f64::MIN, 0, 0);
        for t in 0..=90 {
            for f in 0..360 {
                let v = ris_array_factor(&p, &ph, (t as f64).to_radians(), (f as f64).to_radians(), LAM).norm();
                if v > best.0 {
                    best = (v, t, f);
                }
            }
        }
        assert_eq!((best.1 as f64, best.2 as f64), (t0, f0));
    }
}

#[test]
fn steering_thirty_degrees_suppresses_mirror_direction() {
    let p = panel(32, 32);
    let t = 30f64.to_radians();
    let p = p.clone().with_phases(&ris_single_beam_profile(&p, t, 0.0, LAM)).unwrap();
    let n = p.normal();
    let inc = -n;
    let wanted = apply_ris_to_path(&p, &inc, &Vec3::new(t.sin(), 0.0, t.cos()), LAM).norm();
    let mirror = apply_ris_to_path(&p, &inc, &Vec3::new(-t.sin(), 0.0, t.cos()), LAM).norm();
    assert!((wanted - 1.0).abs() < 1e-9);
    assert!(wanted >= 100.0 * mirror, "{wanted} vs {mirror}");
}

#[test]
fn specular_profile_reduces_to_mirror() {
    let p = panel(8, 8);
    let inc = -from_az_el(0.7, PI / 2.0 - 0.5);
    let out = Vec3::new(inc.x, inc.y, -inc.z);
    assert!((apply_ris_to_path(&p, &inc, &out, LAM).norm() - 1.0).abs() < 1e-12);
}

#[test]
fn optimizer_single_target_matches_profile() {
    let p = panel(16, 16);
    let (t0, f0) = (0.4, 0.3);
    let (ph, history) = ris_multibeam_optimize_traced(&p, &[target(t0, f0, 1.0)], LAM, 200, 0.5, 9).unwrap();
    assert!(history.windows(2).all(|w| w[1] <= w[0]), "objective increased");
    let gain = ris_array_factor(&p, &ph, t0, f0, LAM).norm();
    let reference = ris_array_factor(&p, &ris_single_beam_profile(&p, t0, f0, LAM), t0, f0, LAM).norm();
    assert!(gain >= 0.98 * 256.0, "{gain}");
    assert!((gain - reference).abs() <= 0.02 * reference);
}

#[test]
fn optimizer_two_symmetric_beams() {
    let p = panel(16, 16);
    let t = 30f64.to_radians();
    let targets = [target(t, 0.0, 0.7), target(t, PI, 0.7)];
    let (ph, history) = ris_multibeam_optimize_traced(&p, &targets, LAM, 300, 0.5, 3).unwrap();
    assert!(history.windows(2).all(|w| w[1] <= w[0]));
    for b in &targets {
        let g = ris_array_factor(&p, &ph, b.theta, b.phi, LAM).norm();
        assert!(g >= 0.4 * 256.0, "beam at phi={} has {g}", b.phi);
    }
}

#[test]
fn optimizer_is_deterministic_given_seed() {
    let p = panel(8, 8);
    let t = [target(0.3, 1.0, 1.0), target(0.5, -1.0, 0.5)];
    let a = ris_multibeam_optimize(&p, &t, LAM, 50, 0.5, 42).unwrap();
    assert_eq!(a, ris_multibeam_optimize(&p, &t, LAM, 50, 0.5, 42).unwrap());
    assert!(a.iter().all(|x| *x > -PI && *x <= PI));
}

#[test]
fn optimizer_rejects_zero_iterations() {
    let p = panel(4, 4);
    assert!(matches!(
        ris_multibeam_optimize(&p, &[target(0.2, 0.0, 1.0)], LAM, 0, 0.5, 1),
        Err(DeviceError::InvalidArgument(_))
    ));
}

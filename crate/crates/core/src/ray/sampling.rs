//! Deterministic launch-direction sets.

use std::f64::consts::PI;

use super::RayError;
use crate::geometry::Vec3;

const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

fn fibonacci_point(k: usize, count: usize, z_hi: f64, z_lo: f64) -> Vec3 {
    // cos θ runs linearly from z_hi down to z_lo over the k index.
    let frac = (k as f64 + 0.5) / count as f64;
    let cos_t = z_hi - (z_hi - z_lo) * frac;
    let theta = cos_t.clamp(-1.0, 1.0).acos();
    let phi = 2.0 * PI * k as f64 / GOLDEN_RATIO;
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    Vec3::new(st * cp, st * sp, ct)
}

/// Fibonacci-sphere directions: θ_k = arccos(1 − 2(k+½)/M), φ_k = 2πk/Φ.
pub fn fibonacci_directions(count: usize) -> Result<Vec<Vec3>, RayError> {
    if count == 0 {
        return Err(RayError::InvalidArgument("launch count must be at least 1".into()));
    }
    Ok((0..count).map(|k| fibonacci_point(k, count, 1.0, -1.0)).collect())
}

/// Fibonacci directions with `round(fraction · count)` of them packed into
/// the polar band `[θ_lo, θ_hi]` and the rest spread over the whole sphere.
pub fn biased_directions(count: usize, elevation_band: (f64, f64), fraction: f64) -> Result<Vec<Vec3>, RayError> {
    let (lo, hi) = elevation_band;
    if !(0.0..=PI).contains(&lo) || !(0.0..=PI).contains(&hi) || !(lo < hi) {
        return Err(RayError::InvalidArgument(format!(
            "polar band [{lo}, {hi}] is not a non-empty sub-interval of [0, pi]"
        )));
    }
    if !(0.0..=1.0).contains(&fraction) {
        return Err(RayError::InvalidArgument(format!("bias fraction {fraction} outside [0, 1]")));
    }
    if count == 0 {
        return Err(RayError::InvalidArgument("launch count must be at least 1".into()));
    }
    let in_band = ((fraction * count as f64).round() as usize).min(count);
    let rest = count - in_band;
    let mut out = Vec::with_capacity(count);
    out.extend((0..in_band).map(|k| fibonacci_point(k, in_band, lo.cos(), hi.cos())));
    out.extend((0..rest).map(|k| fibonacci_point(k, rest, 1.0, -1.0)));
    Ok(out)
}

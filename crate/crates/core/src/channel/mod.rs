//! Channel impulse and frequency responses from traced paths.

mod tensor;

pub use crate::ray::PathRecord;
pub use tensor::{read_channel_tensor, write_channel_tensor, ChannelMeta, ChannelTensor, TapMeta, TensorLayout};

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

use crate::devices::{array_response_towards, doppler_shift, AntennaArray, Terminal};
use crate::ray::{trace_paths, RayError, TraceParams, TraceScene};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tracing failed: {0}")]
    Trace(#[from] RayError),
}

/// Dense `rows × cols` complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    fn add_outer(&mut self, scale: Complex64, left: &[Complex64], right_conj: &[Complex64]) {
        for (r, a) in left.iter().enumerate() {
            for (c, b) in right_conj.iter().enumerate() {
                self.data[r * self.cols + c] += scale * a * b.conj();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CirTap {
    pub index: i64,
    pub matrix: CMatrix,
}

/// `N_r × N_t × F` frequency response, stored (rx, tx, freq) row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cfr {
    pub n_rx: usize,
    pub n_tx: usize,
    pub freqs: Vec<f64>,
    pub data: Vec<Complex64>,
}

impl Cfr {
    pub fn get(&self, r: usize, t: usize, f: usize) -> Complex64 {
        self.data[(r * self.n_tx + t) * self.freqs.len() + f]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelResponse {
    pub tx_id: String,
    pub rx_id: String,
    pub cir_taps: Vec<CirTap>,
    pub cfr: Cfr,
    pub sample_rate: f64,
    pub paths: Vec<PathRecord>,
}

/// `count` points evenly spaced over [−B/2, B/2] (a single point sits at 0).
pub fn frequency_grid(bandwidth: f64, count: usize) -> Result<Vec<f64>, ChannelError> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(ChannelError::InvalidArgument("bandwidth must be positive".into()));
    }
    match count {
        0 => Err(ChannelError::InvalidArgument("frequency grid needs at least one point".into())),
        1 => Ok(vec![0.0]),
        n => Ok((0..n).map(|i| -bandwidth / 2.0 + bandwidth * i as f64 / (n - 1) as f64).collect()),
    }
}

fn steering(p: &PathRecord, tx: &AntennaArray, rx: &AntennaArray, wavelength: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    // Receive response towards the source, transmit response along departure.
    let a_r = array_response_towards(rx, &-p.arrival, wavelength);
    let a_t = array_response_towards(tx, &p.departure, wavelength);
    (a_r, a_t)
}

/// Tapped-delay-line MIMO channel: each path adds `α a_r a_tᴴ` at tap
/// `round(τ·B)`. Taps come back sorted by index.
pub fn assemble_cir(
    paths: &[PathRecord],
    tx: &AntennaArray,
    rx: &AntennaArray,
    wavelength: f64,
    bandwidth: f64,
) -> Result<Vec<CirTap>, ChannelError> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(ChannelError::InvalidArgument("bandwidth must be positive".into()));
    }
    let mut taps: std::collections::BTreeMap<i64, CMatrix> = std::collections::BTreeMap::new();
    for p in paths {
        let idx = (p.delay * bandwidth).round() as i64;
        let (a_r, a_t) = steering(p, tx, rx, wavelength);
        taps.entry(idx)
            .or_insert_with(|| CMatrix::zeros(rx.len(), tx.len()))
            .add_outer(p.gain, &a_r, &a_t);
    }
    Ok(taps.into_iter().map(|(index, matrix)| CirTap { index, matrix }).collect())
}

/// Exact frequency response `Σ α a_r a_tᴴ e^{−j2πfτ}` on `freqs` (Hz,
/// relative to the carrier).
pub fn evaluate_cfr(
    paths: &[PathRecord],
    tx: &AntennaArray,
    rx: &AntennaArray,
    wavelength: f64,
    freqs: &[f64],
) -> Result<Cfr, ChannelError> {
    if freqs.is_empty() || !freqs.iter().all(|f| f.is_finite()) {
        return Err(ChannelError::InvalidArgument("frequency grid must be non-empty and finite".into()));
    }
    let (nr, nt, nf) = (rx.len(), tx.len(), freqs.len());
    let mut data = vec![Complex64::new(0.0, 0.0); nr * nt * nf];
    for p in paths {
        let (a_r, a_t) = steering(p, tx, rx, wavelength);
        let rot: Vec<Complex64> = freqs
            .iter()
            .map(|f| p.gain * Complex64::from_polar(1.0, -2.0 * PI * f * p.delay))
            .collect();
        for (r, ar) in a_r.iter().enumerate() {
            for (t, at) in a_t.iter().enumerate() {
                let h = ar * at.conj();
                let base = (r * nt + t) * nf;
                for (k, g) in rot.iter().enumerate() {
                    data[base + k] += h * g;
                }
            }
        }
    }
    Ok(Cfr {
        n_rx: nr,
        n_tx: nt,
        freqs: freqs.to_vec(),
        data,
    })
}

/// Per-path summary values.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMetrics {
    pub path_loss_db: f64,
    pub delay: f64,
    pub aod: (f64, f64),
    pub aoa: (f64, f64),
    pub doppler_hz: f64,
    pub phase: f64,
}

/// Path loss is `−20 log₁₀|α|` with the Friis-anchored gain normalisation.
/// Paths with zero gain are dropped with a warning.
pub fn path_metrics(paths: &[PathRecord]) -> Vec<PathMetrics> {
    paths
        .iter()
        .filter_map(|p| {
            if p.gain.norm() == 0.0 {
                log::warn!("dropping zero-gain path to receiver {}", p.receiver);
                return None;
            }
            Some(PathMetrics {
                path_loss_db: p.path_loss_db(),
                delay: p.delay,
                aod: p.aod(),
                aoa: p.aoa(),
                doppler_hz: p.doppler_hz,
                phase: p.phase(),
            })
        })
        .collect()
}

/// Fills in each path's Doppler shift from the terminal velocities.
pub fn apply_doppler(paths: &mut [PathRecord], v_tx: &crate::geometry::Vec3, v_rx: &crate::geometry::Vec3, wavelength: f64) {
    for p in paths {
        p.doppler_hz = doppler_shift(&p.departure, &p.arrival, v_tx, v_rx, wavelength);
    }
}

/// Retraces the link at each snapshot time with both terminals moved by
/// `p + v·t`, and synthesises the channel on `n_freq` points across the band.
#[allow(clippy::too_many_arguments)]
pub fn time_series_channel(
    ts: &TraceScene,
    tx: &Terminal,
    rx: &Terminal,
    launch: &[crate::geometry::Vec3],
    params: &TraceParams,
    times: &[f64],
    bandwidth: f64,
    n_freq: usize,
) -> Result<Vec<ChannelResponse>, ChannelError> {
    if times.is_empty() {
        return Err(ChannelError::InvalidArgument("at least one snapshot time is required".into()));
    }
    if !times.iter().all(|t| t.is_finite()) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(ChannelError::InvalidArgument("snapshot times must be finite and strictly increasing".into()));
    }
    let wavelength = ts.scene().wavelength();
    let freqs = frequency_grid(bandwidth, n_freq)?;
    let (atx, arx) = (tx.oriented_array(), rx.oriented_array());
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let ptx = tx.position + tx.velocity * t;
        let prx = rx.position + rx.velocity * t;
        let p = TraceParams {
            tx_power_w: tx.tx_power_w(),
            ..*params
        };
        let (mut per_rx, _) = trace_paths(ts, &ptx, &[prx], launch, &p)?;
        let mut paths = per_rx.pop().unwrap_or_default();
        apply_doppler(&mut paths, &tx.velocity, &rx.velocity, wavelength);
        out.push(ChannelResponse {
            tx_id: tx.id.clone(),
            rx_id: rx.id.clone(),
            cir_taps: assemble_cir(&paths, &atx, &arx, wavelength, bandwidth)?,
            cfr: evaluate_cfr(&paths, &atx, &arx, wavelength, &freqs)?,
            sample_rate: bandwidth,
            paths,
        });
    }
    Ok(out)
}

//! Binary channel tensor (`DTCH`) and its JSON sidecar.
//!
//! Layout, little-endian: magic `DTCH`, then u32 version, N_r, N_t, N_last
//! (tap or frequency count) and layout flag (0 = taps, 1 = frequency),
//! followed by N_r·N_t·N_last complex values as interleaved f32 (re, im)
//! pairs in (rx, tx, last) row-major order.

use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};

use super::{Cfr, CirTap};

pub const MAGIC: &[u8; 4] = b"DTCH";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorLayout {
    Taps = 0,
    Frequency = 1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    pub n_rx: usize,
    pub n_tx: usize,
    pub n_last: usize,
    pub layout: TensorLayout,
    pub data: Vec<Complex32>,
}

impl ChannelTensor {
    pub fn from_cfr(cfr: &Cfr) -> Self {
        ChannelTensor {
            n_rx: cfr.n_rx,
            n_tx: cfr.n_tx,
            n_last: cfr.freqs.len(),
            layout: TensorLayout::Frequency,
            data: cfr.data.iter().map(|z| Complex32::new(z.re as f32, z.im as f32)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TapMeta {
    pub index: i64,
    /// Row-major N_r × N_t real parts.
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TapMeta {
    pub fn from_tap(t: &CirTap) -> Self {
        TapMeta {
            index: t.index,
            re: t.matrix.data.iter().map(|z| z.re).collect(),
            im: t.matrix.data.iter().map(|z| z.im).collect(),
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }
}

/// Link metadata stored next to each tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMeta {
    pub tx: String,
    pub rx: String,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub sample_rate_hz: f64,
    pub snapshot_time_s: f64,
    pub layout: TensorLayout,
    pub n_rx: usize,
    pub n_tx: usize,
    pub freq_grid_hz: Vec<f64>,
    pub path_count: usize,
    pub cir_taps: Vec<TapMeta>,
}

pub fn write_channel_tensor(t: &ChannelTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * t.data.len());
    out.extend_from_slice(MAGIC);
    for v in [VERSION, t.n_rx as u32, t.n_tx as u32, t.n_last as u32, t.layout as u32] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for z in &t.data {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn read_channel_tensor(bytes: &[u8]) -> Result<ChannelTensor, String> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err("not a channel tensor (bad magic)".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4-byte slice"));
    if word(0) != VERSION {
        return Err(format!("unsupported tensor version {}", word(0)));
    }
    let (n_rx, n_tx, n_last) = (word(1) as usize, word(2) as usize, word(3) as usize);
    let layout = match word(4) {
        0 => TensorLayout::Taps,
        1 => TensorLayout::Frequency,
        f => return Err(format!("unknown layout flag {f}")),
    };
    let count = n_rx
        .checked_mul(n_tx)
        .and_then(|x| x.checked_mul(n_last))
        .ok_or("tensor dimensions overflow")?;
    if bytes.len() != HEADER_LEN + 8 * count {
        return Err(format!(
            "tensor payload is {} bytes, expected {}",
            bytes.len() - HEADER_LEN,
            8 * count
        ));
    }
    let data = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| {
            Complex32::new(
                f32::from_le_bytes(c[..4].try_into().expect("4 bytes")),
                f32::from_le_bytes(c[4..].try_into().expect("4 bytes")),
            )
        })
        .collect();
    Ok(ChannelTensor {
        n_rx,
        n_tx,
        n_last,
        layout,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let t = ChannelTensor {
            n_rx: 2,
            n_tx: 3,
            n_last: 4,
            layout: TensorLayout::Frequency,
            data: (0..24).map(|i| Complex32::new(i as f32 * 0.5, -(i as f32) / 3.0)).collect(),
        };
        let bytes = write_channel_tensor(&t);
        assert_eq!(&bytes[..4], b"DTCH");
        assert_eq!(bytes.len(), 24 + 24 * 8);
        assert_eq!(read_channel_tensor(&bytes).unwrap(), t);
    }

    #[test]
    fn truncated_rejected() {
        let t = ChannelTensor {
            n_rx: 1,
            n_tx: 1,
            n_last: 2,
            layout: TensorLayout::Taps,
            data: vec![Complex32::new(1.0, 0.0); 2],
        };
        let bytes = write_channel_tensor(&t);
        assert!(read_channel_tensor(&bytes[..bytes.len() - 1]).is_err());
        assert!(read_channel_tensor(b"XXXX").is_err());
    }
}

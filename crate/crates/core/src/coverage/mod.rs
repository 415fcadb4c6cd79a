//! Received-power maps on planar grids.

mod raster;

pub use raster::{rasterize, Palette};

use std::io::{Read, Write};
use thiserror::Error;

use crate::devices::Terminal;
use crate::geometry::{plane_basis, Vec3};
use crate::ray::{trace_paths, RayError, TerminationPolicy, TraceParams, TraceScene};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tracing failed: {0}")]
    Trace(#[from] RayError),
}

/// A planar lattice. Cells are `1/resolution` metres square, centred on
/// `center`; `u`/`v` span the plane, with `rotation` turning them about the
/// normal.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub center: Vec3,
    pub width: f64,
    pub height: f64,
    pub normal: Vec3,
    pub rotation: f64,
    /// Cells per metre.
    pub resolution: f64,
}

impl GridSpec {
    /// Horizontal grid (normal +z) without rotation.
    pub fn horizontal(center: Vec3, width: f64, height: f64, resolution: f64) -> Self {
        GridSpec {
            center,
            width,
            height,
            normal: Vec3::z(),
            rotation: 0.0,
            resolution,
        }
    }

    pub fn validate(&self) -> Result<(), CoverageError> {
        if !(self.width > 0.0 && self.height > 0.0) || !self.width.is_finite() || !self.height.is_finite() {
            return Err(CoverageError::InvalidArgument("grid extent must be positive".into()));
        }
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return Err(CoverageError::InvalidArgument("grid resolution must be positive".into()));
        }
        if !(self.normal.norm() > 0.0) || !self.center.iter().all(|c| c.is_finite()) || !self.rotation.is_finite() {
            return Err(CoverageError::InvalidArgument("grid orientation is degenerate".into()));
        }
        let (nx, ny) = self.dims();
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(CoverageError::InvalidArgument("grid has too many cells".into()));
        }
        Ok(())
    }

    /// (columns, rows) = (⌈w·res⌉, ⌈h·res⌉).
    pub fn dims(&self) -> (usize, usize) {
        (
            (self.width * self.resolution - 1e-9).ceil().max(1.0) as usize,
            (self.height * self.resolution - 1e-9).ceil().max(1.0) as usize,
        )
    }

    /// In-plane unit axes (u, v).
    pub fn axes(&self) -> (Vec3, Vec3) {
        plane_basis(&self.normal, self.rotation)
    }

    /// Centre of cell (ix, iy).
    pub fn cell_center(&self, ix: usize, iy: usize) -> Vec3 {
        let (nx, ny) = self.dims();
        let (u, v) = self.axes();
        let step = 1.0 / self.resolution;
        let du = (ix as f64 + 0.5 - nx as f64 / 2.0) * step;
        let dv = (iy as f64 + 0.5 - ny as f64 / 2.0) * step;
        self.center + u * du + v * dv
    }

    /// All cell centres, row-major (iy outer).
    pub fn cell_centers(&self) -> Vec<Vec3> {
        let (nx, ny) = self.dims();
        (0..ny).flat_map(|iy| (0..nx).map(move |ix| (ix, iy))).map(|(ix, iy)| self.cell_center(ix, iy)).collect()
    }
}

/// Received power per cell in dBm; `None` marks cells no path reached.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    pub spec: GridSpec,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<Option<f64>>,
}

impl CoverageGrid {
    pub fn get(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.nx + ix]
    }

    pub fn cells(&self) -> Vec<CoverageCell> {
        let mut out = Vec::with_capacity(self.values.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(CoverageCell {
                    ix,
                    iy,
                    position: self.spec.cell_center(ix, iy),
                    power_dbm: self.get(ix, iy),
                });
            }
        }
        out
    }
}

/// Computes the non-coherent received power `10 log₁₀(Σ P_tx|α|²) + 30` dBm
/// at each cell centre.
pub fn compute_coverage(
    ts: &TraceScene,
    tx: &Terminal,
    spec: &GridSpec,
    policy: &TerminationPolicy,
    launch: &[Vec3],
    capture_radius: f64,
    diffraction: bool,
) -> Result<CoverageGrid, CoverageError> {
    spec.validate()?;
    let centers = spec.cell_centers();
    if let Some(b) = ts.scene().declared_bounds() {
        if !centers.iter().any(|c| b.contains_point(c, 1e-9)) {
            return Err(CoverageError::InvalidArgument("grid plane lies entirely outside the scene bounds".into()));
        }
    }
    let params = TraceParams {
        policy: *policy,
        capture_radius,
        tx_power_w: tx.tx_power_w(),
        diffraction,
    };
    let (paths, _) = trace_paths(ts, &tx.position, &centers, launch, &params)?;
    let p_tx = tx.tx_power_w();
    let values = paths
        .iter()
        .map(|ps| {
            if ps.is_empty() {
                return None;
            }
            let p: f64 = ps.iter().map(|p| p_tx * p.gain.norm_sqr()).sum();
            (p > 0.0).then(|| 10.0 * p.log10() + 30.0)
        })
        .collect();
    let (nx, ny) = spec.dims();
    Ok(CoverageGrid {
        spec: spec.clone(),
        nx,
        ny,
        values,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCell {
    pub ix: usize,
    pub iy: usize,
    pub position: Vec3,
    pub power_dbm: Option<f64>,
}

pub const COVERAGE_CSV_HEADER: [&str; 6] = ["cell_x", "cell_y", "x", "y", "z", "power_dBm"];
const NO_COVERAGE: &str = "none";

pub fn write_coverage_csv<W: Write>(cells: &[CoverageCell], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COVERAGE_CSV_HEADER)?;
    for c in cells {
        w.write_record([
            c.ix.to_string(),
            c.iy.to_string(),
            c.position.x.to_string(),
            c.position.y.to_string(),
            c.position.z.to_string(),
            c.power_dbm.map_or_else(|| NO_COVERAGE.to_string(), |v| v.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_coverage_csv<R: Read>(input: R) -> Result<Vec<CoverageCell>, String> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(COVERAGE_CSV_HEADER.iter().copied()) {
        return Err("unexpected coverage CSV header".into());
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let bad = |what: &str| format!("row {}: bad {what}", i + 1);
        let num = |k: usize| rec[k].parse::<f64>().map_err(|_| bad("coordinate"));
        out.push(CoverageCell {
            ix: rec[0].parse().map_err(|_| bad("cell_x"))?,
            iy: rec[1].parse().map_err(|_| bad("cell_y"))?,
            position: Vec3::new(num(2)?, num(3)?, num(4)?),
            power_dbm: match &rec[5] {
                NO_COVERAGE => None,
                s => Some(s.parse().map_err(|_| bad("power"))?),
            },
        });
    }
    Ok(out)
}

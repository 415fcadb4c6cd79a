//! End-to-end scenario execution: trace, synthesise, map, collect.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::channel::{
    apply_doppler, assemble_cir, evaluate_cfr, frequency_grid, ChannelError, ChannelMeta, ChannelTensor, TapMeta,
};
use crate::config::{GridJob, Scenario};
use crate::coverage::{compute_coverage, rasterize, CoverageError, CoverageGrid};
use crate::package::{GridOutput, LinkOutput, ScenarioResults};
use crate::ray::{trace_paths, PathRow, RayError, TraceParams, TraceStats};
use crate::scene::serialize_scene;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("ray_engine: {0}")]
    Trace(#[from] RayError),
    #[error("channel_synthesis: {0}")]
    Channel(#[from] ChannelError),
    #[error("coverage: {0}")]
    Coverage(#[from] CoverageError),
    #[error("unknown grid `{requested}`; available: {}", .available.join(", "))]
    UnknownGrid { requested: String, available: Vec<String> },
}

/// Totals reported after a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    /// (link id, path count) in output order.
    pub link_paths: Vec<(String, usize)>,
    pub stats: TraceStats,
    pub elapsed: Duration,
}

fn add_stats(acc: &mut TraceStats, s: &TraceStats) {
    acc.rays_launched += s.rays_launched;
    acc.segments += s.segments;
    acc.candidates += s.candidates;
    acc.paths += s.paths;
}

/// `<bs>.<mt>`, suffixed with `@<snapshot>` when there are several snapshots.
pub fn link_id(bs: &str, mt: &str, snapshot: usize, snapshots: usize) -> String {
    if snapshots > 1 {
        format!("{bs}.{mt}@{snapshot}")
    } else {
        format!("{bs}.{mt}")
    }
}

/// Traces every base station to every mobile terminal at every snapshot,
/// synthesises the channels and computes all coverage grids.
pub fn run_scenario(s: &Scenario) -> Result<(ScenarioResults, RunSummary), PipelineError> {
    let start = Instant::now();
    let cfg = &s.config;
    let lambda = s.scene.wavelength();
    let freqs = frequency_grid(cfg.bandwidth_hz, cfg.cfr_points)?;
    let times = &cfg.snapshot_times_s;
    let mut summary = RunSummary::default();
    let mut links = Vec::new();

    for bs in &s.base_stations {
        let atx = bs.oriented_array();
        for (k, &t) in times.iter().enumerate() {
            let tx = bs.position + bs.velocity * t;
            let rx: Vec<_> = s.mobile_terminals.iter().map(|m| m.position + m.velocity * t).collect();
            if rx.is_empty() {
                continue;
            }
            let params = TraceParams {
                tx_power_w: bs.tx_power_w(),
                ..s.params
            };
            let (per_rx, stats) = trace_paths(&s.trace_scene, &tx, &rx, &s.launch, &params)?;
            add_stats(&mut summary.stats, &stats);
            for (mt, mut paths) in s.mobile_terminals.iter().zip(per_rx) {
                apply_doppler(&mut paths, &bs.velocity, &mt.velocity, lambda);
                let arx = mt.oriented_array();
                let taps = assemble_cir(&paths, &atx, &arx, lambda, cfg.bandwidth_hz)?;
                let cfr = evaluate_cfr(&paths, &atx, &arx, lambda, &freqs)?;
                let id = link_id(&bs.id, &mt.id, k, times.len());
                summary.link_paths.push((id.clone(), paths.len()));
                let tensor = ChannelTensor::from_cfr(&cfr);
                links.push(LinkOutput {
                    paths: paths.iter().enumerate().map(|(i, p)| PathRow::from_record(&mt.id, i, p)).collect(),
                    meta: ChannelMeta {
                        tx: bs.id.clone(),
                        rx: mt.id.clone(),
                        carrier_hz: s.scene.frequency_hz(),
                        bandwidth_hz: cfg.bandwidth_hz,
                        sample_rate_hz: cfg.bandwidth_hz,
                        snapshot_time_s: t,
                        layout: tensor.layout,
                        n_rx: cfr.n_rx,
                        n_tx: cfr.n_tx,
                        freq_grid_hz: freqs.clone(),
                        path_count: paths.len(),
                        cir_taps: taps.iter().map(TapMeta::from_tap).collect(),
                    },
                    tensor,
                    id,
                });
            }
        }
    }

    let mut grids = Vec::new();
    for job in &s.grids {
        let (grid, image) = coverage_job(s, job)?;
        grids.push(GridOutput {
            id: job.id.clone(),
            cells: grid.cells(),
            image,
        });
    }

    let mut config = cfg.clone();
    config.scene = "scene.xml".into();
    let mut config_json = serde_json::to_string_pretty(&config).expect("config serialises");
    config_json.push('\n');
    summary.elapsed = start.elapsed();
    Ok((
        ScenarioResults {
            scene_xml: serialize_scene(&s.scene),
            config_json,
            links,
            grids,
        },
        summary,
    ))
}

fn coverage_job(s: &Scenario, job: &GridJob) -> Result<(CoverageGrid, Vec<u8>), PipelineError> {
    let tx = &s.base_stations[job.transmitter];
    let grid = compute_coverage(
        &s.trace_scene,
        tx,
        &job.spec,
        &s.params.policy,
        &s.launch,
        s.params.capture_radius,
        s.params.diffraction,
    )?;
    let image = rasterize(&grid, job.palette, job.db_range);
    Ok((grid, image))
}

/// Computes one named grid and its image.
pub fn run_coverage(s: &Scenario, grid_id: &str) -> Result<(CoverageGrid, Vec<u8>), PipelineError> {
    let job = s.grids.iter().find(|g| g.id == grid_id).ok_or_else(|| PipelineError::UnknownGrid {
        requested: grid_id.to_string(),
        available: s.grids.iter().map(|g| g.id.clone()).collect(),
    })?;
    coverage_job(s, job)
}

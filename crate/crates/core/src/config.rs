//! JSON simulation configuration.
//!
//! Angles are given in degrees in the document and converted to radians
//! once, in [`Scenario::build`]. Array and RIS spacings are in wavelengths.
//! Relative paths are resolved against the directory holding the config.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coverage::{GridSpec, Palette};
use crate::devices::{
    ris_multibeam_optimize, ris_single_beam_profile, AntennaArray, BeamTarget, RisPanel, Terminal,
};
use crate::geometry::{plane_rotation, Vec3};
use crate::package::is_valid_id;
use crate::ray::{biased_directions, fibonacci_directions, TerminationPolicy, TraceParams, TraceScene};
use crate::scene::{assign_materials_by_name, builtin_materials, parse_scene, Material, MaterialRules, Scene};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Scene XML file.
    pub scene: String,
    /// Object-name prefix → material. Empty keeps the scene's own bindings.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub materials: BTreeMap<String, MaterialSpec>,
    #[serde(default)]
    pub base_stations: Vec<TerminalConfig>,
    #[serde(default)]
    pub mobile_terminals: Vec<TerminalConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ris: Vec<RisConfig>,
    pub termination: TerminationConfig,
    pub launch: LaunchConfig,
    pub bandwidth_hz: f64,
    #[serde(default = "default_cfr_points")]
    pub cfr_points: usize,
    #[serde(default)]
    pub grids: Vec<GridConfig>,
    #[serde(default = "default_times")]
    pub snapshot_times_s: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

/// A built-in material name (`"pec"` for a perfect conductor) or an inline
/// definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MaterialSpec {
    Named(String),
    Inline(Material),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalConfig {
    pub id: String,
    pub position: [f64; 3],
    #[serde(default)]
    pub heading_deg: f64,
    #[serde(default)]
    pub tilt_deg: f64,
    #[serde(default = "default_tx_power")]
    pub tx_power_dbm: f64,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "half")]
    pub spacing_v: f64,
    #[serde(default = "half")]
    pub spacing_h: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            rows: 1,
            cols: 1,
            spacing_v: 0.5,
            spacing_h: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RisConfig {
    pub id: String,
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "half")]
    pub pitch: f64,
    pub center: [f64; 3],
    /// Reflective side.
    pub normal: [f64; 3],
    #[serde(default)]
    pub rotation_deg: f64,
    #[serde(default)]
    pub profile: RisProfile,
}

/// Phase programming. Beam angles are polar/azimuth in the panel frame
/// (polar from the normal, azimuth from the panel's column axis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RisProfile {
    #[default]
    Flat,
    SingleBeam {
        theta_deg: f64,
        phi_deg: f64,
    },
    MultiBeam {
        targets: Vec<BeamConfig>,
        #[serde(default = "default_iterations")]
        iterations: usize,
        #[serde(default = "default_step")]
        step: f64,
    },
    /// Explicit per-element phases, row-major.
    Phases {
        values_deg: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub theta_deg: f64,
    pub phi_deg: f64,
    #[serde(default = "one")]
    pub weight: f64,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminationConfig {
    pub max_interactions: u32,
    pub min_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaunchConfig {
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<BiasConfig>,
    #[serde(default = "default_capture")]
    pub capture_radius_m: f64,
    #[serde(default = "yes")]
    pub diffraction: bool,
}

/// Packs `fraction` of the launch directions into the polar band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasConfig {
    pub theta_min_deg: f64,
    pub theta_max_deg: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub id: String,
    pub center: [f64; 3],
    pub width: f64,
    pub height: f64,
    #[serde(default = "up")]
    pub normal: [f64; 3],
    #[serde(default)]
    pub rotation_deg: f64,
    /// Cells per metre.
    pub resolution: f64,
    /// Base station id; the first base station when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transmitter: Option<String>,
    #[serde(default = "default_palette")]
    pub palette: String,
    #[serde(default = "default_range")]
    pub db_range: [f64; 2],
}

fn default_cfr_points() -> usize {
    64
}
fn default_times() -> Vec<f64> {
    vec![0.0]
}
fn default_tx_power() -> f64 {
    30.0
}
fn half() -> f64 {
    0.5
}
fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn default_iterations() -> usize {
    200
}
fn default_step() -> f64 {
    0.5
}
fn default_capture() -> f64 {
    0.5
}
fn up() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn default_palette() -> String {
    "viridis".into()
}
fn default_range() -> [f64; 2] {
    [-120.0, -40.0]
}

/// One failed check, tagged with the component that rejected it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub module: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.module, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn from_issues(issues: Vec<Issue>) -> Self {
        ValidationReport {
            ok: issues.is_empty(),
            issues,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

fn issue(module: &str, message: impl Into<String>) -> Issue {
    Issue {
        module: module.into(),
        message: message.into(),
    }
}

/// Reads a config file. Returns the config and the directory relative
/// paths are resolved against.
pub fn load_config(path: &Path) -> Result<(SimulationConfig, PathBuf), Issue> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| issue("SimulationConfig", format!("cannot read {}: {e}", path.display())))?;
    let cfg = serde_json::from_str(&text).map_err(|e| issue("SimulationConfig", format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

/// A coverage grid ready to compute.
#[derive(Debug, Clone, PartialEq)]
pub struct GridJob {
    pub id: String,
    pub spec: GridSpec,
    pub transmitter: usize,
    pub palette: Palette,
    pub db_range: (f64, f64),
}

/// A validated, fully resolved configuration.
#[derive(Debug)]
pub struct Scenario {
    pub config: SimulationConfig,
    pub scene: Scene,
    pub trace_scene: TraceScene,
    pub base_stations: Vec<Terminal>,
    pub mobile_terminals: Vec<Terminal>,
    pub launch: Vec<Vec3>,
    pub params: TraceParams,
    pub grids: Vec<GridJob>,
}

fn terminal_id_ok(id: &str) -> bool {
    is_valid_id(id) && !id.contains(['.', '@'])
}

fn finite3(v: &[f64; 3]) -> bool {
    v.iter().all(|c| c.is_finite())
}

fn build_terminal(t: &TerminalConfig, scene: &Scene, issues: &mut Vec<Issue>) -> Option<Terminal> {
    if !terminal_id_ok(&t.id) {
        issues.push(issue(
            "Terminal",
            format!("id `{}` must be non-empty ASCII letters, digits, `_` or `-`", t.id),
        ));
        return None;
    }
    let ok_angles = t.heading_deg.is_finite() && t.tilt_deg.is_finite();
    if !ok_angles || !finite3(&t.position) || !finite3(&t.velocity) {
        issues.push(issue("Terminal", format!("terminal {}: non-finite pose or velocity", t.id)));
        return None;
    }
    let lambda = scene.wavelength();
    let array = match AntennaArray::new(t.array.rows, t.array.cols, t.array.spacing_v * lambda, t.array.spacing_h * lambda) {
        Ok(a) => a,
        Err(e) => {
            issues.push(issue("AntennaArray", format!("terminal {}: {e}", t.id)));
            return None;
        }
    };
    let term = Terminal {
        id: t.id.clone(),
        position: Vec3::from(t.position),
        heading: t.heading_deg.to_radians(),
        tilt: t.tilt_deg.to_radians(),
        tx_power_dbm: t.tx_power_dbm,
        array,
        velocity: Vec3::from(t.velocity),
    };
    match term.validate(scene) {
        Ok(()) => Some(term),
        Err(e) => {
            issues.push(issue("Terminal", e.to_string()));
            None
        }
    }
}

fn build_ris(r: &RisConfig, lambda: f64, seed: u64, issues: &mut Vec<Issue>) -> Option<RisPanel> {
    let fail = |issues: &mut Vec<Issue>, m: String| {
        issues.push(issue("RisPanel", format!("RIS {}: {m}", r.id)));
        None
    };
    if !terminal_id_ok(&r.id) {
        return fail(issues, "invalid id".into());
    }
    let n = Vec3::from(r.normal);
    if !finite3(&r.center) || !finite3(&r.normal) || !(n.norm() > 0.0) || !r.rotation_deg.is_finite() {
        return fail(issues, "center, normal and rotation must be finite with a non-zero normal".into());
    }
    let rot = plane_rotation(&n, r.rotation_deg.to_radians());
    let mut panel = match RisPanel::new(r.id.clone(), r.rows, r.cols, r.pitch * lambda, Vec3::from(r.center), rot) {
        Ok(p) => p,
        Err(e) => return fail(issues, e.to_string()),
    };
    let phases = match &r.profile {
        RisProfile::Flat => return Some(panel),
        RisProfile::SingleBeam { theta_deg, phi_deg } => {
            Ok(ris_single_beam_profile(&panel, theta_deg.to_radians(), phi_deg.to_radians(), lambda))
        }
        RisProfile::MultiBeam {
            targets,
            iterations,
            step,
        } => {
            let t: Vec<BeamTarget> = targets
                .iter()
                .map(|b| BeamTarget {
                    theta: b.theta_deg.to_radians(),
                    phi: b.phi_deg.to_radians(),
                    weight: b.weight,
                    level: b.level,
                })
                .collect();
            ris_multibeam_optimize(&panel, &t, lambda, *iterations, *step, seed)
        }
        RisProfile::Phases { values_deg } => Ok(values_deg.iter().map(|d| d.to_radians()).collect()),
    };
    match phases.and_then(|p| panel.set_phases(&p)) {
        Ok(()) => Some(panel),
        Err(e) => fail(issues, e.to_string()),
    }
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a str>, what: &str, issues: &mut Vec<Issue>) {
    let mut seen = std::collections::BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            issues.push(issue("SimulationConfig", format!("duplicate {what} id `{id}`")));
        }
    }
}

impl Scenario {
    /// Loads the scene, applies material rules and checks every field
    /// against the preconditions of the component that consumes it.
    pub fn build(config: &SimulationConfig, base_dir: &Path) -> Result<Scenario, Vec<Issue>> {
        let mut issues = Vec::new();
        let cfg = config;

        let policy = TerminationPolicy::new(cfg.termination.max_interactions, crate::devices::dbm_to_watts(cfg.termination.min_power_dbm));
        if let Err(e) = &policy {
            issues.push(issue("TerminationPolicy", e.to_string()));
        }
        let launch = match &cfg.launch.bias {
            None => fibonacci_directions(cfg.launch.count).map_err(|e| issue("fibonacci_directions", e.to_string())),
            Some(b) => biased_directions(
                cfg.launch.count,
                (b.theta_min_deg.to_radians(), b.theta_max_deg.to_radians()),
                b.fraction,
            )
            .map_err(|e| issue("biased_directions", e.to_string())),
        };
        let launch = launch.map_err(|e| issues.push(e)).ok();
        if !(cfg.launch.capture_radius_m > 0.0) || !cfg.launch.capture_radius_m.is_finite() {
            issues.push(issue("trace_paths", "capture radius must be positive"));
        }
        if !(cfg.bandwidth_hz > 0.0) || !cfg.bandwidth_hz.is_finite() {
            issues.push(issue("assemble_cir", "bandwidth must be positive"));
        }
        if cfg.cfr_points == 0 {
            issues.push(issue("evaluate_cfr", "cfr_points must be at least 1"));
        }
        if cfg.snapshot_times_s.is_empty()
            || !cfg.snapshot_times_s.iter().all(|t| t.is_finite())
            || cfg.snapshot_times_s.windows(2).any(|w| !(w[1] > w[0]))
        {
            issues.push(issue("time_series_channel", "snapshot times must be non-empty, finite and strictly increasing"));
        }
        check_unique(
            cfg.base_stations.iter().chain(&cfg.mobile_terminals).map(|t| t.id.as_str()),
            "terminal",
            &mut issues,
        );
        check_unique(cfg.grids.iter().map(|g| g.id.as_str()), "grid", &mut issues);
        check_unique(cfg.ris.iter().map(|r| r.id.as_str()), "RIS", &mut issues);

        let scene = load_scene(cfg, base_dir, &mut issues);
        let Some(scene) = scene else {
            return Err(issues);
        };
        let lambda = scene.wavelength();
        let bs: Vec<_> = cfg.base_stations.iter().filter_map(|t| build_terminal(t, &scene, &mut issues)).collect();
        let mt: Vec<_> = cfg.mobile_terminals.iter().filter_map(|t| build_terminal(t, &scene, &mut issues)).collect();
        let ris: Vec<_> = cfg.ris.iter().filter_map(|r| build_ris(r, lambda, cfg.seed, &mut issues)).collect();

        let mut grids = Vec::new();
        for g in &cfg.grids {
            if !is_valid_id(&g.id) {
                issues.push(issue("GridSpec", format!("invalid grid id `{}`", g.id)));
                continue;
            }
            let spec = GridSpec {
                center: Vec3::from(g.center),
                width: g.width,
                height: g.height,
                normal: Vec3::from(g.normal),
                rotation: g.rotation_deg.to_radians(),
                resolution: g.resolution,
            };
            if let Err(e) = spec.validate() {
                issues.push(issue("GridSpec", format!("grid {}: {e}", g.id)));
                continue;
            }
            let transmitter = match &g.transmitter {
                None if cfg.base_stations.is_empty() => {
                    issues.push(issue("GridSpec", format!("grid {} needs a base station", g.id)));
                    continue;
                }
                None => 0,
                Some(id) => match cfg.base_stations.iter().position(|b| &b.id == id) {
                    Some(i) => i,
                    None => {
                        issues.push(issue("GridSpec", format!("grid {}: unknown transmitter `{id}`", g.id)));
                        continue;
                    }
                },
            };
            let Some(palette) = Palette::from_name(&g.palette) else {
                issues.push(issue("rasterize", format!("grid {}: unknown palette `{}`", g.id, g.palette)));
                continue;
            };
            let [lo, hi] = g.db_range;
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                issues.push(issue("rasterize", format!("grid {}: dB range needs min < max", g.id)));
                continue;
            }
            grids.push(GridJob {
                id: g.id.clone(),
                spec,
                transmitter,
                palette,
                db_range: (lo, hi),
            });
        }

        if !issues.is_empty() {
            return Err(issues);
        }
        let params = TraceParams {
            policy: policy.expect("checked above"),
            capture_radius: cfg.launch.capture_radius_m,
            tx_power_w: 1.0,
            diffraction: cfg.launch.diffraction,
        };
        Ok(Scenario {
            config: cfg.clone(),
            trace_scene: TraceScene::with_ris(scene.clone(), ris),
            scene,
            base_stations: bs,
            mobile_terminals: mt,
            launch: launch.expect("checked above"),
            params,
            grids,
        })
    }
}

fn load_scene(cfg: &SimulationConfig, base_dir: &Path, issues: &mut Vec<Issue>) -> Option<Scene> {
    let path = base_dir.join(&cfg.scene);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) => {
            issues.push(issue("parse_scene", format!("cannot read {}: {e}", path.display())));
            return None;
        }
    };
    let scene = match parse_scene(&text) {
        Ok(s) => s,
        Err(e) => {
            issues.push(issue("parse_scene", format!("{}: {e}", path.display())));
            return None;
        }
    };
    if cfg.materials.is_empty() {
        return Some(scene);
    }
    let mut rules = MaterialRules::new();
    for (prefix, spec) in &cfg.materials {
        let m = match spec {
            MaterialSpec::Named(n) if n.eq_ignore_ascii_case("pec") => Material::perfect_conductor("pec"),
            MaterialSpec::Named(n) => match builtin_materials().iter().find(|m| &m.name == n) {
                Some(m) => m.clone(),
                None => {
                    issues.push(issue("assign_materials_by_name", format!("unknown built-in material `{n}`")));
                    return None;
                }
            },
            MaterialSpec::Inline(m) => {
                if let Err(e) = m.validate() {
                    issues.push(issue("assign_materials_by_name", e.to_string()));
                    return None;
                }
                m.clone()
            }
        };
        rules.push(prefix.clone(), m);
    }
    match assign_materials_by_name(&scene, &rules) {
        Ok(s) => Some(s),
        Err(e) => {
            issues.push(issue("assign_materials_by_name", e.to_string()));
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> SimulationConfig {
        serde_json::from_str(
            r#"{
                "scene": "s.xml",
                "termination": {"max_interactions": 2, "min_power_dbm": -160},
                "launch": {"count": 1000},
                "bandwidth_hz": 1e8
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = minimal();
        assert_eq!(c.cfr_points, 64);
        assert_eq!(c.snapshot_times_s, vec![0.0]);
        assert_eq!(c.launch.capture_radius_m, 0.5);
        assert!(c.launch.diffraction);
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: Result<SimulationConfig, _> = serde_json::from_str(
            r#"{"scene": "s.xml", "termination": {"max_interactions": 2, "min_power_dbm": -160},
                "launch": {"count": 10}, "bandwidth_hz": 1e8, "bandwith": 3}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn profile_tagging() {
        let p: RisProfile = serde_json::from_str(r#"{"kind": "single_beam", "theta_deg": 30, "phi_deg": 0}"#).unwrap();
        assert_eq!(
            p,
            RisProfile::SingleBeam {
                theta_deg: 30.0,
                phi_deg: 0.0
            }
        );
    }

    #[test]
    fn zero_max_interactions_names_policy() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.xml"), r#"<scene frequency_hz="3e9"></scene>"#).unwrap();
        let mut c = minimal();
        c.termination.max_interactions = 0;
        let issues = Scenario::build(&c, dir.path()).unwrap_err();
        assert!(issues.iter().any(|i| i.module == "TerminationPolicy"), "{issues:?}");
    }
}

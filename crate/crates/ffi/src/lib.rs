//! C ABI for raytwin.
//!
//! Every function returns an [`RtStatus`]; on failure a message is kept per
//! thread and can be read with [`rt_last_error_message`]. Objects are
//! opaque handles created by `rt_*_new`/`rt_*_load`-style calls and released
//! with the matching `rt_*_free`. Strings returned to the caller must be
//! released with [`rt_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use raytwin::config::{load_config, Scenario, ValidationReport};
use raytwin::em::{fresnel_par, fresnel_perp, InterfaceGeometry};
use raytwin::geometry::Vec3;
use raytwin::package::write_package;
use raytwin::pipeline::run_scenario;
use raytwin::ray::{fibonacci_directions, trace_paths, PathRecord, TerminationPolicy, TraceParams, TraceScene};
use raytwin::scene::parse_scene;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Validation = 4,
    Runtime = 5,
    OutOfRange = 6,
    Panic = 7,
}

/// Opaque parsed scene with its acceleration structure.
pub struct RtScene {
    inner: TraceScene,
}

/// Opaque validated scenario loaded from a JSON config.
pub struct RtScenario {
    inner: Scenario,
}

/// Opaque list of traced paths for one receiver.
pub struct RtPathSet {
    paths: Vec<PathRecord>,
}

/// One propagation path. Angles in radians, delay in seconds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RtPath {
    pub gain_re: f64,
    pub gain_im: f64,
    pub delay_s: f64,
    pub length_m: f64,
    pub aod_az: f64,
    pub aod_el: f64,
    pub aoa_az: f64,
    pub aoa_el: f64,
    pub doppler_hz: f64,
    pub path_loss_db: f64,
    pub interaction_count: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RtFresnel {
    pub perp_re: f64,
    pub perp_im: f64,
    pub par_re: f64,
    pub par_im: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).unwrap_or_default());
}

struct Failure(RtStatus, String);

impl Failure {
    fn new(status: RtStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RtStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RtStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(RtStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(RtStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn vec3_arg(p: *const f64, name: &str) -> Result<Vec3, Failure> {
    if p.is_null() {
        return Err(Failure::new(RtStatus::NullPointer, format!("{name} is null")));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok(Vec3::new(s[0], s[1], s[2]))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::new(RtStatus::NullPointer, format!("{name} is null")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library that has not
/// been freed.
#[no_mangle]
pub unsafe extern "C" fn rt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a scene XML document and builds its acceleration structure.
///
/// # Safety
/// `xml` must be a NUL-terminated string; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn rt_scene_parse(xml: *const c_char, out: *mut *mut RtScene) -> RtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let doc = str_arg(xml, "xml")?;
        let scene = parse_scene(doc).map_err(|e| Failure::new(RtStatus::InvalidArgument, e))?;
        *out = Box::into_raw(Box::new(RtScene {
            inner: TraceScene::new(scene),
        }));
        Ok(())
    })
}

/// # Safety
/// `scene` must be null or a handle from [`rt_scene_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rt_scene_free(scene: *mut RtScene) {
    if !scene.is_null() {
        drop(Box::from_raw(scene));
    }
}

/// # Safety
/// `scene` must be a live scene handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rt_scene_triangle_count(scene: *const RtScene, out: *mut usize) -> RtStatus {
    guard(|| {
        let s = scene.as_ref().ok_or_else(|| Failure::new(RtStatus::NullPointer, "scene is null"))?;
        *out_arg(out, "out")? = s.inner.scene().triangle_count();
        Ok(())
    })
}

/// # Safety
/// `scene` must be a live scene handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rt_scene_wavelength(scene: *const RtScene, out: *mut f64) -> RtStatus {
    guard(|| {
        let s = scene.as_ref().ok_or_else(|| Failure::new(RtStatus::NullPointer, "scene is null"))?;
        *out_arg(out, "out")? = s.inner.scene().wavelength();
        Ok(())
    })
}

/// Traces all paths from `tx` to `rx` (each three doubles, metres) with
/// `launch_count` Fibonacci launch directions and unit transmit power.
///
/// # Safety
/// `scene` must be a live handle, `tx`/`rx` point to three doubles and
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn rt_trace(
    scene: *const RtScene,
    tx: *const f64,
    rx: *const f64,
    max_interactions: u32,
    min_power_w: f64,
    launch_count: usize,
    out: *mut *mut RtPathSet,
) -> RtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let s = scene.as_ref().ok_or_else(|| Failure::new(RtStatus::NullPointer, "scene is null"))?;
        let (tx, rx) = (vec3_arg(tx, "tx")?, vec3_arg(rx, "rx")?);
        let bad = |e: raytwin::ray::RayError| Failure::new(RtStatus::InvalidArgument, e);
        let policy = if max_interactions == 0 {
            TerminationPolicy::line_of_sight(min_power_w)
        } else {
            TerminationPolicy::new(max_interactions, min_power_w)
        }
        .map_err(bad)?;
        let launch = fibonacci_directions(launch_count).map_err(bad)?;
        let (mut per_rx, _) =
            trace_paths(&s.inner, &tx, &[rx], &launch, &TraceParams::new(policy)).map_err(bad)?;
        *out = Box::into_raw(Box::new(RtPathSet {
            paths: per_rx.pop().unwrap_or_default(),
        }));
        Ok(())
    })
}

/// # Safety
/// `set` must be a live path-set handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rt_pathset_len(set: *const RtPathSet, out: *mut usize) -> RtStatus {
    guard(|| {
        let s = set.as_ref().ok_or_else(|| Failure::new(RtStatus::NullPointer, "path set is null"))?;
        *out_arg(out, "out")? = s.paths.len();
        Ok(())
    })
}

/// # Safety
/// `set` must be a live path-set handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rt_pathset_get(set: *const RtPathSet, index: usize, out: *mut RtPath) -> RtStatus {
    guard(|| {
        let s = set.as_ref().ok_or_else(|| Failure::new(RtStatus::NullPointer, "path set is null"))?;
        let out = out_arg(out, "out")?;
        let p = s.paths.get(index).ok_or_else(|| {
            Failure::new(RtStatus::OutOfRange, format!("index {index} out of range (len {})", s.paths.len()))
        })?;
        let (aod_az, aod_el) = p.aod();
        let (aoa_az, aoa_el) = p.aoa();
        *out = RtPath {
            gain_re: p.gain.re,
            gain_im: p.gain.im,
            delay_s: p.delay,
            length_m: p.length,
            aod_az,
            aod_el,
            aoa_az,
            aoa_el,
            doppler_hz: p.doppler_hz,
            path_loss_db: p.path_loss_db(),
            interaction_count: p.interaction_count() as u32,
        };
        Ok(())
    })
}

/// # Safety
/// `set` must be null or a handle from [`rt_trace`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rt_pathset_free(set: *mut RtPathSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Fresnel reflection coefficients (⊥, ∥) for complex refractive indices.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rt_fresnel(
    incident_angle: f64,
    n1_re: f64,
    n1_im: f64,
    n2_re: f64,
    n2_im: f64,
    wavelength: f64,
    out: *mut RtFresnel,
) -> RtStatus {
    use raytwin::Complex64;
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = InterfaceGeometry::new(
            incident_angle,
            Complex64::new(n1_re, n1_im),
            Complex64::new(n2_re, n2_im),
            wavelength,
        )
        .map_err(|e| Failure::new(RtStatus::InvalidArgument, e))?;
        let (a, b) = (fresnel_perp(&g), fresnel_par(&g));
        *out = RtFresnel {
            perp_re: a.re,
            perp_im: a.im,
            par_re: b.re,
            par_im: b.im,
        };
        Ok(())
    })
}

fn report_issues(r: &ValidationReport) -> String {
    r.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

/// Checks a config file. Writes the JSON validation report to `report_json`
/// (free with [`rt_string_free`]) and returns `RT_STATUS_VALIDATION` when
/// it lists problems.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `report_json` null or writable.
#[no_mangle]
pub unsafe extern "C" fn rt_validate(config_path: *const c_char, report_json: *mut *mut c_char) -> RtStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(config_path, "config_path")?);
        let report = match load_config(&path) {
            Err(i) => ValidationReport::from_issues(vec![i]),
            Ok((cfg, base)) => match Scenario::build(&cfg, &base) {
                Ok(_) => ValidationReport::from_issues(Vec::new()),
                Err(issues) => ValidationReport::from_issues(issues),
            },
        };
        if let Some(out) = report_json.as_mut() {
            *out = into_c_string(report.to_json());
        }
        if report.ok {
            Ok(())
        } else {
            Err(Failure::new(RtStatus::Validation, report_issues(&report)))
        }
    })
}

/// Loads and validates a scenario config.
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rt_scenario_load(config_path: *const c_char, out: *mut *mut RtScenario) -> RtStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = PathBuf::from(str_arg(config_path, "config_path")?);
        let (cfg, base) = load_config(&path).map_err(|i| Failure::new(RtStatus::Validation, i))?;
        let s = Scenario::build(&cfg, &base)
            .map_err(|is| Failure::new(RtStatus::Validation, report_issues(&ValidationReport::from_issues(is))))?;
        *out = Box::into_raw(Box::new(RtScenario { inner: s }));
        Ok(())
    })
}

/// Runs the scenario and writes its package under `output_dir`, which must
/// be absent or empty.
///
/// # Safety
/// `scenario` must be a live handle; `output_dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rt_scenario_run(scenario: *const RtScenario, output_dir: *const c_char) -> RtStatus {
    guard(|| {
        let s = scenario
            .as_ref()
            .ok_or_else(|| Failure::new(RtStatus::NullPointer, "scenario is null"))?;
        let root = PathBuf::from(str_arg(output_dir, "output_dir")?);
        let (results, _) = run_scenario(&s.inner).map_err(|e| Failure::new(RtStatus::Runtime, e))?;
        write_package(&results, &root).map_err(|e| Failure::new(RtStatus::Runtime, format!("dataset_io: {e}")))?;
        Ok(())
    })
}

/// # Safety
/// `scenario` must be null or a handle from [`rt_scenario_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rt_scenario_free(scenario: *mut RtScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

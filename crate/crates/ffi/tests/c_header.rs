//! Compiles and runs a small C program against the generated header and
//! the shared library.

use std::path::PathBuf;
use std::process::Command;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn have_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "raytwin.h"

static const char *SCENE =
    "<scene frequency_hz=\"3e9\">"
    "<material name=\"pec\" permittivity=\"1\" conductivity=\"inf\"/>"
    "<object name=\"ground\" material=\"pec\">"
    "<quad v0=\"-500 -500 0\" v1=\"500 -500 0\" v2=\"500 500 0\" v3=\"-500 500 0\"/>"
    "</object></scene>";

int main(void) {
    RtScene *scene = NULL;
    if (rt_scene_parse(SCENE, &scene) != RT_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", rt_last_error_message());
        return 1;
    }
    double tx[3] = {0, 0, 10}, rx[3] = {50, 0, 2};
    RtPathSet *set = NULL;
    if (rt_trace(scene, tx, rx, 1, 1e-30, 20000, &set) != RT_STATUS_OK) {
        fprintf(stderr, "trace: %s\n", rt_last_error_message());
        return 1;
    }
    size_t n = 0;
    rt_pathset_len(set, &n);
    for (size_t i = 0; i < n; i++) {
        RtPath p;
        rt_pathset_get(set, i, &p);
        printf("%u %.9f\n", p.interaction_count, p.length_m);
    }
    if (rt_scene_parse(NULL, &scene) != RT_STATUS_NULL_POINTER) return 2;
    if (strlen(rt_last_error_message()) == 0) return 3;
    rt_pathset_free(set);
    rt_scene_free(scene);
    printf("version %s\n", rt_version());
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    if !have_cc() {
        eprintln!("skipping: no C compiler on PATH");
        return;
    }
    let dir = target_dir();
    let lib = dir.join("libraytwin_ffi.so");
    if !lib.exists() {
        eprintln!("skipping: {} not built", lib.display());
        return;
    }
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("smoke.c");
    let exe = work.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&dir)
        .arg("-lraytwin_ffi")
        .arg(format!("-Wl,-rpath,{}", dir.display()))
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "smoke program failed: {text} {}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3, "{text}");
    assert!(lines.iter().any(|l| l.starts_with("0 50.635955")));
    assert!(lines.iter().any(|l| l.starts_with("1 51.419840")));
    assert_eq!(lines[2], format!("version {}", env!("CARGO_PKG_VERSION")));
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/raytwin.h")).unwrap();
    for name in [
        "rt_version",
        "rt_last_error_message",
        "rt_string_free",
        "rt_scene_parse",
        "rt_scene_free",
        "rt_trace",
        "rt_pathset_get",
        "rt_pathset_free",
        "rt_fresnel",
        "rt_validate",
        "rt_scenario_load",
        "rt_scenario_run",
        "rt_scenario_free",
        "RT_STATUS_OK",
        "typedef struct RtScene RtScene",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

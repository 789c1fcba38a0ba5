use std::ffi::{CStr, CString};
use std::ptr;

use swnoether_ffi::*;

fn last_error() -> String {
    let p = sw_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn config(toml: &str) -> *mut SwConfig {
    let text = CString::new(toml).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { sw_config_from_toml(text.as_ptr(), &mut c) }, SwStatus::Ok);
    c
}

fn take(s: *mut libc::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { sw_string_free(s) };
    out
}

#[test]
fn config_round_trip_and_errors() {
    let c = sw_config_default();
    let toml = take(unsafe { sw_config_to_toml(c) });
    assert!(toml.contains("[model]") && toml.contains("kind = \"salmon\""));
    assert_eq!(unsafe { sw_config_validate(c) }, SwStatus::Ok);
    unsafe { sw_config_free(c) };

    let bad = CString::new("[model]\nkind = \"salmon\"\nbogus = 1\n").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { sw_config_from_toml(bad.as_ptr(), &mut out) }, SwStatus::ConfigError);
    assert!(out.is_null());
    assert!(last_error().contains("line 3"));

    assert_eq!(unsafe { sw_config_from_toml(ptr::null(), &mut out) }, SwStatus::NullPointer);
    assert_eq!(unsafe { sw_config_validate(ptr::null()) }, SwStatus::NullPointer);
    let sg0 = config("[model]\nkind = \"sg\"\nf = 0.0\n");
    assert_eq!(unsafe { sw_config_validate(sg0) }, SwStatus::ConfigError);
    assert!(last_error().contains("nonzero"));
    unsafe { sw_config_free(sg0) };
    assert!(!sw_version().is_null());
}

#[test]
fn execute_matches_cli_codes() {
    let c = sw_config_default();
    let mut report = ptr::null_mut();
    assert_eq!(unsafe { sw_execute(c, SwCommand::Check, &mut report) }, SwStatus::Ok);
    assert!(take(report).contains("all checks pass"));
    unsafe { sw_config_free(c) };

    let custom = config("[model]\nkind = \"custom\"\nlagrangian = \"a*x_t\"\n");
    assert_eq!(unsafe { sw_execute(custom, SwCommand::Check, ptr::null_mut()) }, SwStatus::VerificationFailed);
    unsafe { sw_config_free(custom) };

    let failing = config("[mesh]\nnx = 4\nny = 4\n[initial]\nkind = \"rigid-rotation\"\n[solver]\ntol = 1e-30\nmax_iter = 2\n");
    let dir = tempfile::tempdir().unwrap();
    let d = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { sw_config_set_output_dir(failing, d.as_ptr()) }, SwStatus::Ok);
    assert_eq!(unsafe { sw_execute(failing, SwCommand::Run, ptr::null_mut()) }, SwStatus::SolverError);
    assert!(last_error().contains("slab 0"));
    unsafe { sw_config_free(failing) };
}

#[test]
fn run_handle_exposes_conserved_series() {
    let c = config("[mesh]\nnx = 4\nny = 4\n[time]\nslabs = 4\nhorizon = 0.4\n[initial]\nkind = \"rigid-rotation\"\n");
    assert_eq!(unsafe { sw_config_set_seed(c, 9) }, SwStatus::Ok);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { sw_run(c, &mut run) }, SwStatus::Ok);
    assert_eq!(unsafe { sw_run_num_knots(run) }, 5);
    assert_eq!(unsafe { sw_run_num_quantities(run) }, 6);
    assert_eq!(take(unsafe { sw_run_quantity_name(run, 0) }), "energy");
    assert!(unsafe { sw_run_quantity_name(run, 99) }.is_null());
    assert!(unsafe { sw_run_worst_identity_sum(run) } < 1e-11);
    assert!(unsafe { sw_run_newton_iterations(run) } > 0);

    let energy = CString::new("energy").unwrap();
    let (mut e0, mut e4, mut drift) = (0.0, 0.0, f64::NAN);
    assert_eq!(unsafe { sw_run_conserved(run, energy.as_ptr(), 0, &mut e0) }, SwStatus::Ok);
    assert_eq!(unsafe { sw_run_conserved(run, energy.as_ptr(), 4, &mut e4) }, SwStatus::Ok);
    assert_eq!(unsafe { sw_run_drift(run, energy.as_ptr(), &mut drift) }, SwStatus::Ok);
    assert!(drift < 1e-9 && (e4 - e0).abs() <= drift);
    assert_eq!(unsafe { sw_run_conserved(run, energy.as_ptr(), 5, &mut e0) }, SwStatus::NotFound);
    let missing = CString::new("enstrophy").unwrap();
    assert_eq!(unsafe { sw_run_drift(run, missing.as_ptr(), &mut drift) }, SwStatus::NotFound);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let p = CString::new(path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { sw_run_write_report(run, p.as_ptr()) }, SwStatus::Ok);
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("slab,t0,t1,quantity"));

    unsafe { sw_run_free(run) };
    unsafe { sw_config_free(c) };
    assert!(unsafe { sw_run_worst_identity_sum(ptr::null()) }.is_nan());
    assert_eq!(unsafe { sw_run_num_knots(ptr::null()) }, 0);
}

#[test]
fn header_declares_every_function() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/swnoether.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let names: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(names.len() >= 18);
    for n in names {
        assert!(header.contains(&format!("{n}(")), "{n}");
    }
    assert!(header.contains("typedef struct SwConfig SwConfig;"));
    assert!(header.contains("SW_STATUS_SOLVER_ERROR = 3"));
}

#[test]
fn c_program_links_against_the_static_library() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libswnoether_ffi.a");
    assert!(lib.is_file(), "{}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("check");
    let status = std::process::Command::new("cc")
        .arg(manifest.join("examples/check.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler named cc");
    assert!(status.success());
    let out = std::process::Command::new(&exe).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("all checks pass") && text.contains("error: configuration error"), "{text}");
}

use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use branchlab_ffi::*;

fn text(f: impl Fn(*mut c_char, usize, *mut usize) -> BlStatus) -> (BlStatus, String) {
    let mut needed = 0usize;
    let status = f(ptr::null_mut(), 0, &mut needed);
    if status != BlStatus::Ok {
        return (status, String::new());
    }
    let mut buf = vec![0 as c_char; needed];
    let status = f(buf.as_mut_ptr(), buf.len(), &mut needed);
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned();
    (status, s)
}

fn last_error() -> String {
    text(|b, l, n| unsafe { bl_last_error(b, l, n) }).1
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

#[test]
fn branch_handle_round_trip() {
    let mut h = ptr::null_mut();
    let xi = cstr("14");
    let spec = cstr("syracuse:2/3");
    assert_eq!(unsafe { bl_branch_iterate(3, 2, xi.as_ptr(), spec.as_ptr(), 5, &mut h) }, BlStatus::Ok);
    let mut len = 0;
    assert_eq!(unsafe { bl_branch_len(h, &mut len) }, BlStatus::Ok);
    assert_eq!(len, 6);
    let states: Vec<String> = (0..len).map(|n| text(|b, l, k| unsafe { bl_branch_state(h, n, b, l, k) }).1).collect();
    assert_eq!(states, ["14", "22", "17", "13/2", "5/4", "1"]);
    assert_eq!(text(|b, l, k| unsafe { bl_branch_closed_form(h, 4, b, l, k) }).1, "5/4");
    let (status, json) = text(|b, l, k| unsafe { bl_lemma_domination_json(h, 6, b, l, k) });
    assert_eq!(status, BlStatus::Ok);
    assert!(json.contains("\"domination-base-case\""));
    unsafe { bl_branch_free(h) };
}

#[test]
fn errors_map_to_status_codes() {
    let mut h = ptr::null_mut();
    let spec = cstr("zero");
    let xi = cstr("1");
    assert_eq!(unsafe { bl_branch_iterate(3, 2, xi.as_ptr(), spec.as_ptr(), 5, &mut h) }, BlStatus::Domain);
    assert!(last_error().contains("xi range"));
    let bad = cstr("1/0");
    assert_eq!(unsafe { bl_branch_iterate(3, 2, bad.as_ptr(), spec.as_ptr(), 5, &mut h) }, BlStatus::InvalidArgument);
    assert_eq!(unsafe { bl_branch_iterate(3, 2, ptr::null(), spec.as_ptr(), 5, &mut h) }, BlStatus::NullPointer);
    assert_eq!(unsafe { bl_branch_len(ptr::null(), ptr::null_mut()) }, BlStatus::NullPointer);
    let w = cstr("10");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bl_syracuse_trajectory(w.as_ptr(), 10, &mut s) }, BlStatus::InvalidArgument);
    assert!(h.is_null() && s.is_null());
    unsafe {
        bl_branch_free(ptr::null_mut());
        bl_syracuse_free(ptr::null_mut());
        bl_ca_free(ptr::null_mut());
    }
}

#[test]
fn short_buffer_is_reported_and_untouched() {
    let w = cstr("27");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { bl_syracuse_trajectory(w.as_ptr(), 1000, &mut s) }, BlStatus::Ok);
    let (mut len, mut one) = (0, false);
    assert_eq!(unsafe { bl_syracuse_len(s, &mut len, &mut one) }, BlStatus::Ok);
    assert!(one && len == 42);
    let mut buf = [b'x' as c_char; 2];
    let mut needed = 0;
    assert_eq!(unsafe { bl_syracuse_value(s, 1, buf.as_mut_ptr(), 2, &mut needed) }, BlStatus::BufferTooSmall);
    assert_eq!(needed, 3);
    assert_eq!(buf, [b'x' as c_char; 2]);
    assert_eq!(text(|b, l, k| unsafe { bl_syracuse_value(s, 1, b, l, k) }).1, "41");
    unsafe { bl_syracuse_free(s) };
}

#[test]
fn ca_render_matches_core() {
    let seed = cstr("27");
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { bl_ca_build(BlCaMode::Syracuse, seed.as_ptr(), 120, 0, &mut g) }, BlStatus::Ok);
    let mut gray = ptr::null_mut();
    assert_eq!(unsafe { bl_ca_gray(g, &mut gray) }, BlStatus::Ok);
    let (status, pbm) = text(|b, l, k| unsafe { bl_ca_render(gray, BlRenderFormat::Pbm, b, l, k) });
    assert_eq!(status, BlStatus::Ok);

    let core = branchlab::cagrid::build_fitted(
        branchlab::cagrid::CaMode::Syracuse,
        &branchlab::cagrid::CaSeed::Odd(27u32.into()),
        120,
        branchlab::cagrid::DEFAULT_FRAC_DEPTH as usize,
    )
    .unwrap();
    let mut expected = Vec::new();
    branchlab::cagrid::render(&branchlab::cagrid::gray(&core), branchlab::cagrid::RenderFormat::Pbm, Default::default(), &mut expected)
        .unwrap();
    assert_eq!(pbm.as_bytes(), expected.as_slice());
    let (mut rows, mut width) = (0, 0);
    assert_eq!(unsafe { bl_ca_shape(gray, &mut rows, &mut width) }, BlStatus::Ok);
    assert_eq!((rows, width), (120, core.width));
    unsafe {
        bl_ca_free(gray);
        bl_ca_free(g);
    }
}

#[test]
fn certificate_replay_over_abi() {
    let traj = branchlab::syracuse::trajectory(&27u32.into(), 1000).unwrap();
    let emb = branchlab::syracuse::embed(&traj).unwrap();
    let reports = branchlab::lemmalab::domination_check(&emb.trajectory, 6).unwrap();
    let cert = reports.iter().find_map(|r| r.certificate.clone()).expect("W0 = 27 violates domination");
    let json = cstr(&serde_json::to_string(&cert).unwrap());
    let mut valid = false;
    assert_eq!(unsafe { bl_certificate_replay(json.as_ptr(), &mut valid) }, BlStatus::Ok);
    assert!(valid);
    let bogus = cstr("{}");
    assert_eq!(unsafe { bl_certificate_replay(bogus.as_ptr(), &mut valid) }, BlStatus::Io);
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(bl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles `tests/c/smoke.c` against the generated header and the static
/// library, then runs it. Skipped when no C compiler is on the path.
#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // the test binary lives in target/<profile>/deps; the static library one level up
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libbranchlab_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("branchlab_smoke");
    let status = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}

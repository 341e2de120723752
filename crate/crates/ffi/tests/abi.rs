use hecke_boundary::spin_chain::{build_hamiltonian, ChainSpec, HamiltonianRoute};
use hecke_boundary::ModelParams;
use hecke_boundary_ffi::*;
use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;

fn cx(re: f64, im: f64) -> HbComplex {
    HbComplex { re, im }
}

fn chain(n: usize, sites: usize, right: HbRight) -> *mut HbChain {
    let mut h = std::ptr::null_mut();
    let s = unsafe {
        hb_chain_new(n, sites, cx(0.41, 0.0), cx(0.9, 0.2), cx(0.6, 0.0), HbGauge::Homogeneous, HbLeft::Identity, right, 1, cx(0.3, 0.0), &mut h)
    };
    assert_eq!(s, HbStatus::Ok);
    h
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { hb_string_free(p) };
    s
}

#[test]
fn verify_returns_json_report() {
    let c = chain(2, 2, HbRight::Explicit);
    let mut out = std::ptr::null_mut();
    assert_eq!(unsafe { hb_verify(c, HbSuite::Chain, 2, 3, 1e-9, &mut out) }, HbStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["suite"], "chain");
    assert_eq!(v["pass"], true);
    // an unreachable tolerance reports failure, not an error
    assert_eq!(unsafe { hb_verify(c, HbSuite::Hecke, 1, 3, 1e-300, &mut out) }, HbStatus::CheckFailed);
    take_string(out);
    assert_eq!(unsafe { hb_verify(c, HbSuite::Hecke, 1, 3, -1.0, &mut out) }, HbStatus::InvalidInput);
    unsafe { hb_chain_free(c) };
}

#[test]
fn hamiltonian_matches_library() {
    let c = chain(3, 2, HbRight::Explicit);
    let mut h = std::ptr::null_mut();
    assert_eq!(unsafe { hb_hamiltonian(c, &mut h) }, HbStatus::Ok);
    let d = unsafe { hb_operator_dim(h) };
    assert_eq!(d, 9);
    let mut buf = vec![cx(0.0, 0.0); d * d];
    assert_eq!(unsafe { hb_operator_copy(h, buf.as_mut_ptr(), buf.len() - 1) }, HbStatus::InvalidInput);
    assert_eq!(unsafe { hb_operator_copy(h, buf.as_mut_ptr(), buf.len()) }, HbStatus::Ok);
    let p = ModelParams::new(3, hecke_boundary::C64::new(0.41, 0.0), hecke_boundary::C64::new(0.9, 0.2), hecke_boundary::C64::new(0.6, 0.0), 2).unwrap();
    let want = build_hamiltonian(&ChainSpec::standard(p), HamiltonianRoute::HeckeForm).unwrap();
    for r in 0..d {
        for k in 0..d {
            let z = want.get(r, k);
            assert_eq!((buf[r * d + k].re, buf[r * d + k].im), (z.re, z.im));
        }
    }
    unsafe {
        hb_operator_free(h);
        hb_chain_free(c);
    }
}

#[test]
fn transfer_and_spectrum() {
    let c = chain(2, 3, HbRight::Trivial);
    let mut t = std::ptr::null_mut();
    assert_eq!(unsafe { hb_transfer(c, cx(0.2, 0.1), false, &mut t) }, HbStatus::Ok);
    assert_eq!(unsafe { hb_operator_dim(t) }, 8);
    unsafe { hb_operator_free(t) };
    let mut out = std::ptr::null_mut();
    // the Hamiltonian needs the explicit or ansatz boundary
    assert_eq!(unsafe { hb_spectrum(c, &mut out) }, HbStatus::InvalidInput);
    unsafe { hb_chain_free(c) };

    let c = chain(2, 3, HbRight::Explicit);
    assert_eq!(unsafe { hb_spectrum(c, &mut out) }, HbStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 8);
    unsafe { hb_chain_free(c) };
}

#[test]
fn diagonal_block_is_validated() {
    let mut h = std::ptr::null_mut();
    let s = unsafe {
        hb_chain_new(3, 2, cx(0.41, 0.0), cx(0.9, 0.2), cx(0.6, 0.0), HbGauge::Homogeneous, HbLeft::Identity, HbRight::Diagonal, 3, cx(0.3, 0.0), &mut h)
    };
    assert_eq!(s, HbStatus::InvalidInput);
    let msg = unsafe { CStr::from_ptr(hb_last_error()) }.to_str().unwrap();
    assert!(msg.contains("diag_block"), "{msg}");
}

#[test]
fn header_declares_every_export() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/hecke_boundary.h")).unwrap();
    for f in [
        "hb_last_error", "hb_chain_new", "hb_chain_free", "hb_verify", "hb_spectrum", "hb_hamiltonian",
        "hb_transfer", "hb_operator_dim", "hb_operator_copy", "hb_operator_free", "hb_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f}");
    }
    assert!(header.contains("typedef struct HbChain HbChain;"));
}

/// Compile and run a C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libhecke_boundary_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let bin = std::env::temp_dir().join(format!("hb-smoke-{}", std::process::id()));
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    let _ = std::fs::remove_file(&bin);
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

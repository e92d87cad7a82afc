use std::ffi::{CStr, CString};
use std::ptr;

use tensor_phase_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(tp_last_error()) }.to_string_lossy().into_owned()
}

fn diag(entries: &[(f64, f64)]) -> *mut TpTensor {
    let n = entries.len();
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    for (k, &(a, b)) in entries.iter().enumerate() {
        re[k * n + k] = a;
        im[k * n + k] = b;
    }
    let dims = [n];
    let mut t = ptr::null_mut();
    let s = unsafe { tp_tensor_new(dims.as_ptr(), 1, dims.as_ptr(), 1, re.as_ptr(), im.as_ptr(), n * n, &mut t) };
    assert_eq!(s, TpStatus::Ok);
    t
}

#[test]
fn phases_of_diagonal_tensor() {
    let angles = [0.9_f64, -0.2, 0.4];
    let t = diag(&angles.map(|a| (a.cos(), a.sin())));
    let mut buf = [0.0; 3];
    let (mut len, mut gamma) = (0, 0.0);
    let s = unsafe { tp_phases(t, buf.as_mut_ptr(), 3, &mut len, &mut gamma) };
    assert_eq!(s, TpStatus::Ok);
    assert_eq!(len, 3);
    for (got, want) in buf.iter().zip([0.9, 0.4, -0.2]) {
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");
    }
    let mut class = TpClass::Indefinite;
    let mut angle = 0.0;
    assert_eq!(unsafe { tp_classify(t, &mut class, &mut angle) }, TpStatus::Ok);
    assert_eq!(class, TpClass::Sectorial);
    unsafe { tp_tensor_free(t) };
}

#[test]
fn short_buffer_reports_needed_length() {
    let t = diag(&[(1.0, 0.0), (2.0, 0.0)]);
    let mut buf = [0.0; 1];
    let (mut len, mut gamma) = (0, 0.0);
    let s = unsafe { tp_phases(t, buf.as_mut_ptr(), 1, &mut len, &mut gamma) };
    assert_eq!(s, TpStatus::BufferTooSmall);
    assert_eq!(len, 2);
    assert!(!last_error().is_empty());
    unsafe { tp_tensor_free(t) };
}

#[test]
fn not_sectorial_maps_to_status() {
    let t = diag(&[(1.0, 0.0), (-1.0, 0.0)]);
    let mut buf = [0.0; 2];
    let (mut len, mut gamma) = (0, 0.0);
    let s = unsafe { tp_phases(t, buf.as_mut_ptr(), 2, &mut len, &mut gamma) };
    assert_eq!(s, TpStatus::NotSectorial);
    assert_eq!(last_error(), "not sectorial");
    unsafe { tp_tensor_free(t) };
}

#[test]
fn null_arguments_are_rejected() {
    let mut len = 0;
    let mut gamma = 0.0;
    let s = unsafe { tp_phases(ptr::null(), ptr::null_mut(), 0, &mut len, &mut gamma) };
    assert_eq!(s, TpStatus::NullArgument);
    assert_eq!(unsafe { tp_tensor_from_json(ptr::null(), ptr::null_mut()) }, TpStatus::NullArgument);
    unsafe {
        tp_tensor_free(ptr::null_mut());
        tp_system_free(ptr::null_mut());
        tp_string_free(ptr::null_mut());
    }
}

#[test]
fn json_roundtrip_and_product() {
    let dims = [2usize, 2];
    let mut id = ptr::null_mut();
    assert_eq!(unsafe { tp_tensor_identity(dims.as_ptr(), 2, &mut id) }, TpStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { tp_tensor_to_json(id, &mut json) }, TpStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { tp_tensor_from_json(json, &mut back) }, TpStatus::Ok);
    let mut prod = ptr::null_mut();
    assert_eq!(unsafe { tp_einstein_product(id, back, &mut prod) }, TpStatus::Ok);
    let (mut rows, mut cols) = (0, 0);
    assert_eq!(unsafe { tp_tensor_size(prod, &mut rows, &mut cols) }, TpStatus::Ok);
    assert_eq!((rows, cols), (4, 4));
    let mut re = [0.0; 16];
    let mut im = [0.0; 16];
    let mut len = 0;
    assert_eq!(unsafe { tp_tensor_data(prod, re.as_mut_ptr(), im.as_mut_ptr(), 16, &mut len) }, TpStatus::Ok);
    for k in 0..16 {
        assert_eq!(re[k], if k % 5 == 0 { 1.0 } else { 0.0 });
        assert_eq!(im[k], 0.0);
    }
    unsafe {
        tp_string_free(json);
        for t in [id, back, prod] {
            tp_tensor_free(t);
        }
    }
}

#[test]
fn malformed_json_is_format_error() {
    let text = CString::new("{\"dims\": 3}").unwrap();
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { tp_tensor_from_json(text.as_ptr(), &mut t) }, TpStatus::Format);
    assert!(t.is_null());
}

fn first_order_json() -> CString {
    let sys = tensor_phase::control::MltiSystem::first_order(&[2, 2], 1.0, 1.0).unwrap();
    CString::new(sys.to_json()).unwrap()
}

#[test]
fn system_checks() {
    let text = first_order_json();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { tp_system_from_json(text.as_ptr(), &mut g) }, TpStatus::Ok);
    let (mut value, mut omega) = (0.0, -1.0);
    assert_eq!(unsafe { tp_hinf_norm(g, 100, &mut value, &mut omega) }, TpStatus::Ok);
    assert!((value - 1.0).abs() < 1e-12 && omega == 0.0);
    let mut verdict = TpVerdict::Fail;
    let mut oracle = TpLoop::Unstable;
    assert_eq!(unsafe { tp_small_phase_check(g, g, 100, &mut verdict, &mut oracle) }, TpStatus::Ok);
    assert_eq!((verdict, oracle), (TpVerdict::Pass, TpLoop::Stable));
    assert_eq!(unsafe { tp_hinf_norm(g, 1, &mut value, &mut omega) }, TpStatus::Domain);
    unsafe { tp_system_free(g) };
}

/// Compiles a small C program against the generated header and the static
/// library, then runs it.
#[test]
fn header_compiles_and_links_from_c() {
    let Some(cc) = ["cc", "gcc", "clang"].into_iter().find(|c| std::process::Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().unwrap().parent().unwrap();
    let lib = target_dir.join("libtensor_phase_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let tmp = std::env::temp_dir().join(format!("tp_c_abi_{}", std::process::id()));
    std::fs::create_dir_all(&tmp).unwrap();
    let src = tmp.join("main.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "tensor_phase.h"
int main(void) {
    size_t dims[1] = {2};
    double re[4] = {1, 0, 0, 1}, im[4] = {0, 0, 0, 0};
    tp_tensor *t = NULL;
    if (tp_tensor_new(dims, 1, dims, 1, re, im, 4, &t) != TP_STATUS_OK) return 1;
    double phases[2]; size_t len = 0; double gamma = 1;
    if (tp_phases(t, phases, 2, &len, &gamma) != TP_STATUS_OK) return 2;
    tp_tensor_free(t);
    if (len != 2 || phases[0] != 0.0 || gamma != 0.0) return 3;
    if (tp_phases(NULL, phases, 2, &len, &gamma) != TP_STATUS_NULL_ARGUMENT) return 4;
    printf("%s\n", tp_last_error());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = tmp.join("main");
    let status = std::process::Command::new(cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = std::process::Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "C program exited with {:?}", run.status);
    assert!(String::from_utf8_lossy(&run.stdout).contains("null"));
    std::fs::remove_dir_all(&tmp).ok();
}

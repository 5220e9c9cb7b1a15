use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::path::Path;
use std::process::Command;
use std::ptr;

use bfst::hmm::{HmmModel, TagId};
use bfst_ffi::*;

/// After `A`, `B` is likely; `[A,B]` alone prefers `A`.
fn model_text() -> String {
    HmmModel::new(
        vec!["A".into(), "B".into()],
        vec![
            ("[A]".into(), vec![TagId(0)]),
            ("[A,B]".into(), vec![TagId(0), TagId(1)]),
            ("[B]".into(), vec![TagId(1)]),
        ],
        vec![0.5, 0.5],
        vec![vec![0.1, 0.9], vec![0.6, 0.4]],
        vec![vec![0.4, 0.0], vec![0.6, 0.5], vec![0.0, 0.5]],
    )
    .unwrap()
    .to_text()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bfst_last_error()) }.to_str().unwrap().to_owned()
}

fn take(s: *mut c_char) -> String {
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { bfst_string_free(s) };
    out
}

fn load_model() -> *mut BfstModel {
    let text = CString::new(model_text()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { bfst_model_from_text(text.as_ptr(), &mut m) }, BfstStatus::Ok);
    m
}

fn classes(names: &[&str]) -> (Vec<CString>, Vec<*const c_char>) {
    let owned: Vec<CString> = names.iter().map(|n| CString::new(*n).unwrap()).collect();
    let ptrs = owned.iter().map(|c| c.as_ptr()).collect();
    (owned, ptrs)
}

#[test]
fn compile_tag_and_count() {
    let m = load_model();
    assert_eq!(unsafe { bfst_model_num_tags(m) }, 2);
    assert_eq!(unsafe { bfst_model_num_classes(m) }, 3);

    let mut f = ptr::null_mut();
    assert_eq!(unsafe { bfst_compile(m, 0, 0, 0, &mut f) }, BfstStatus::Ok);
    assert_eq!(unsafe { bfst_fst_num_states(f) }, 1);
    assert_eq!(unsafe { bfst_fst_num_arcs(f) }, 3);

    let (_keep, input) = classes(&["[A]", "[A,B]"]);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bfst_fst_first(m, f, input.as_ptr(), input.len(), &mut out) }, BfstStatus::Ok);
    // Without context `[A,B]` is tagged by its best emitter.
    assert_eq!(take(out), "A A");
    assert_eq!(unsafe { bfst_viterbi(m, input.as_ptr(), input.len(), &mut out) }, BfstStatus::Ok);
    assert_eq!(take(out), "A B");

    let mut n = 0usize;
    assert_eq!(unsafe { bfst_fst_count(m, f, input.as_ptr(), input.len(), 10, &mut n) }, BfstStatus::Ok);
    assert_eq!(n, 1);

    let mut g = ptr::null_mut();
    assert_eq!(unsafe { bfst_compile(m, 1, 0, 0, &mut g) }, BfstStatus::Ok);
    assert_eq!(unsafe { bfst_fst_first(m, g, input.as_ptr(), input.len(), &mut out) }, BfstStatus::Ok);
    assert_eq!(take(out), "A B");
    unsafe {
        bfst_fst_free(f);
        bfst_fst_free(g);
        bfst_model_free(m);
    }
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = load_model();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { bfst_compile(m, 1, 1, 0, &mut f) }, BfstStatus::Ok);
    let p1 = CString::new(dir.path().join("a.fst").to_str().unwrap()).unwrap();
    let p2 = CString::new(dir.path().join("b.fst").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { bfst_fst_save(f, p1.as_ptr()) }, BfstStatus::Ok);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { bfst_fst_load(p1.as_ptr(), &mut g) }, BfstStatus::Ok);
    assert_eq!(unsafe { bfst_fst_num_arcs(g) }, unsafe { bfst_fst_num_arcs(f) });
    assert_eq!(unsafe { bfst_fst_save(g, p2.as_ptr()) }, BfstStatus::Ok);
    let a = std::fs::read(dir.path().join("a.fst")).unwrap();
    let b = std::fs::read(dir.path().join("b.fst")).unwrap();
    assert_eq!(a, b);

    let hmm = dir.path().join("m.hmm");
    std::fs::write(&hmm, model_text()).unwrap();
    let hp = CString::new(hmm.to_str().unwrap()).unwrap();
    let mut m2 = ptr::null_mut();
    assert_eq!(unsafe { bfst_model_load(hp.as_ptr(), &mut m2) }, BfstStatus::Ok);
    assert_eq!(unsafe { bfst_model_num_classes(m2) }, 3);
    unsafe {
        bfst_fst_free(f);
        bfst_fst_free(g);
        bfst_model_free(m);
        bfst_model_free(m2);
    }
}

#[test]
fn error_codes_and_messages() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { bfst_model_from_text(ptr::null(), &mut m) }, BfstStatus::NullPointer);
    assert!(last_error().contains("null"));

    let bad = CString::new("HMMv1\n#TAGS\nA\n#PI\nA x\n").unwrap();
    assert_eq!(unsafe { bfst_model_from_text(bad.as_ptr(), &mut m) }, BfstStatus::Parse);
    assert!(last_error().contains("line 5"), "{}", last_error());
    assert!(m.is_null());

    let missing = CString::new("/nonexistent/dir/x.hmm").unwrap();
    assert_eq!(unsafe { bfst_model_load(missing.as_ptr(), &mut m) }, BfstStatus::Io);

    let invalid = [0xffu8, 0];
    assert_eq!(unsafe { bfst_model_load(invalid.as_ptr().cast(), &mut m) }, BfstStatus::InvalidUtf8);

    let model = load_model();
    assert_eq!(last_error(), "");
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { bfst_compile(model, 2, 2, 5, &mut f) }, BfstStatus::BudgetExceeded);
    assert!(last_error().contains("enumerate"), "{}", last_error());
    assert!(f.is_null());

    let (_keep, input) = classes(&["[A]", "[C]"]);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bfst_viterbi(model, input.as_ptr(), 2, &mut out) }, BfstStatus::UnknownSymbol);
    assert!(last_error().contains("[C]"));
    assert_eq!(unsafe { bfst_viterbi(model, input.as_ptr(), 0, &mut out) }, BfstStatus::NoResult);
    assert_eq!(unsafe { bfst_viterbi(model, input.as_ptr(), 1, ptr::null_mut()) }, BfstStatus::NullPointer);
    assert_eq!(unsafe { bfst_compile(ptr::null(), 0, 0, 0, &mut f) }, BfstStatus::NullPointer);

    assert_eq!(unsafe { bfst_fst_num_states(ptr::null()) }, 0);
    unsafe {
        bfst_model_free(ptr::null_mut());
        bfst_fst_free(ptr::null_mut());
        bfst_string_free(ptr::null_mut());
        bfst_model_free(model);
    }
}

#[test]
fn count_limit_is_reported() {
    // `[A,B] [A,B]` has one result, which already exceeds a limit of 0.
    let m = load_model();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { bfst_compile(m, 1, 1, 0, &mut f) }, BfstStatus::Ok);
    let (_keep, input) = classes(&["[A,B]", "[A,B]"]);
    let mut n = 0usize;
    assert_eq!(unsafe { bfst_fst_count(m, f, input.as_ptr(), 2, 0, &mut n) }, BfstStatus::LimitExceeded);
    unsafe {
        bfst_fst_free(f);
        bfst_model_free(m);
    }
}

#[test]
fn header_compiles_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("bfst.h")).unwrap();
    for name in ["bfst_compile", "bfst_fst_first", "bfst_string_free", "BFST_STATUS_BUDGET_EXCEEDED"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "bfst.h"
int run(const char *path) {
    BfstModel *m = NULL;
    BfstFst *f = NULL;
    if (bfst_model_load(path, &m) != BFST_STATUS_OK) return 1;
    if (bfst_compile(m, 1, 1, 0, &f) != BFST_STATUS_OK) { bfst_model_free(m); return 2; }
    size_t n = bfst_fst_num_states(f);
    bfst_fst_free(f);
    bfst_model_free(m);
    return n > 0 ? 0 : 3;
}
"#,
    )
    .unwrap();
    let status = match Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(&include).arg(&src).status() {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler; skipping");
            return;
        }
    };
    assert!(status.success());
}

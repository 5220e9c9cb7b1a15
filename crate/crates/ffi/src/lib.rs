//! C interface to `bfst`.
//!
//! Every function returns a [`BfstStatus`]; results come back through out
//! pointers. After a failure, [`bfst_last_error`] describes it. Handles are
//! opaque and must be released with their `_free` function. Strings returned
//! by the library are released with [`bfst_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};

use bfst::btype::{compile_btype, BTypeConfig, CompileError};
use bfst::fst::{Fst, FstError};
use bfst::hmm::{viterbi, ClassId, HmmError, HmmModel, TagId};
use bfst::tagger::{FstBinding, TaggerError};
use libc::{c_char, size_t};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BfstStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    BudgetExceeded = 5,
    UnknownSymbol = 6,
    LimitExceeded = 7,
    NoResult = 8,
    Internal = 9,
}

/// A trained HMM.
pub struct BfstModel {
    model: HmmModel,
}

/// A compiled transducer.
pub struct BfstFst {
    fst: Fst,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(BfstStatus, String);

impl Failure {
    fn new(status: BfstStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

impl From<HmmError> for Failure {
    fn from(e: HmmError) -> Self {
        let status = match e {
            HmmError::Io(_) => BfstStatus::Io,
            HmmError::UnknownClass(_) | HmmError::UnknownTag(_) => BfstStatus::UnknownSymbol,
            _ => BfstStatus::Parse,
        };
        Failure::new(status, e)
    }
}

impl From<FstError> for Failure {
    fn from(e: FstError) -> Self {
        let status = match e {
            FstError::Io(_) => BfstStatus::Io,
            FstError::Parse { .. } => BfstStatus::Parse,
            FstError::BudgetExceeded { .. } => BfstStatus::BudgetExceeded,
            FstError::LimitExceeded { .. } => BfstStatus::LimitExceeded,
            FstError::UnknownSymbol(_) | FstError::UnknownName(_) => BfstStatus::UnknownSymbol,
            _ => BfstStatus::Internal,
        };
        Failure::new(status, e)
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        let status = match &e {
            CompileError::NotComputable { .. } => BfstStatus::BudgetExceeded,
            _ => BfstStatus::Internal,
        };
        Failure::new(status, e)
    }
}

impl From<TaggerError> for Failure {
    fn from(e: TaggerError) -> Self {
        match e {
            TaggerError::Fst { source, .. } => source.into(),
            TaggerError::Hmm(e) => e.into(),
            TaggerError::NoResult { .. } => Failure::new(BfstStatus::NoResult, e),
            e => Failure::new(BfstStatus::UnknownSymbol, e),
        }
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Runs `f`, recording any failure or panic as the last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BfstStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BfstStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            BfstStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(BfstStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::new(BfstStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::new(BfstStatus::NullPointer, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(BfstStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn class_args(m: &HmmModel, classes: *const *const c_char, n: size_t) -> Result<Vec<ClassId>, Failure> {
    if n == 0 {
        return Err(Failure::new(BfstStatus::NoResult, "empty class sequence"));
    }
    if classes.is_null() {
        return Err(Failure::new(BfstStatus::NullPointer, "classes is null"));
    }
    std::slice::from_raw_parts(classes, n)
        .iter()
        .map(|&p| {
            let name = str_arg(p, "class name")?;
            m.class_id(name).ok_or_else(|| Failure::new(BfstStatus::UnknownSymbol, format!("unknown class `{name}`")))
        })
        .collect()
}

fn tags_string(m: &HmmModel, tags: &[TagId]) -> Result<*mut c_char, Failure> {
    let s = tags.iter().map(|&t| m.tag_name(t)).collect::<Vec<_>>().join(" ");
    CString::new(s).map(CString::into_raw).map_err(|e| Failure::new(BfstStatus::Internal, e))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bfst_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Loads an HMMv1 model file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bfst_model_load(path: *const c_char, out: *mut *mut BfstModel) -> BfstStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let file = File::open(path).map_err(|e| Failure::new(BfstStatus::Io, format!("{path}: {e}")))?;
        let model = HmmModel::read_text(BufReader::new(file))?;
        *out = Box::into_raw(Box::new(BfstModel { model }));
        Ok(())
    })
}

/// Parses a model from HMMv1 text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bfst_model_from_text(text: *const c_char, out: *mut *mut BfstModel) -> BfstStatus {
    guard(|| {
        out_arg(out, "out")?;
        let model = HmmModel::from_text(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(BfstModel { model }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bfst_model_free(model: *mut BfstModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn bfst_model_num_tags(model: *const BfstModel) -> size_t {
    model.as_ref().map_or(0, |m| m.model.num_tags())
}

/// # Safety
/// `model` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn bfst_model_num_classes(model: *const BfstModel) -> size_t {
    model.as_ref().map_or(0, |m| m.model.num_classes())
}

/// Compiles the b-type transducer with look-back `beta` and look-ahead
/// `alpha`. `max_states` bounds every intermediate automaton; 0 means the
/// library default.
///
/// # Safety
/// `model` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bfst_compile(
    model: *const BfstModel,
    beta: size_t,
    alpha: size_t,
    max_states: size_t,
    out: *mut *mut BfstFst,
) -> BfstStatus {
    guard(|| {
        out_arg(out, "out")?;
        let m = ref_arg(model, "model")?;
        let mut cfg = BTypeConfig::new(beta, alpha);
        if max_states > 0 {
            cfg = cfg.with_max_states(max_states);
        }
        let fst = compile_btype(&m.model, &cfg)?;
        *out = Box::into_raw(Box::new(BfstFst { fst }));
        Ok(())
    })
}

/// Loads an FSTv1 file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn bfst_fst_load(path: *const c_char, out: *mut *mut BfstFst) -> BfstStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let file = File::open(path).map_err(|e| Failure::new(BfstStatus::Io, format!("{path}: {e}")))?;
        let fst = Fst::read_text(BufReader::new(file))?;
        *out = Box::into_raw(Box::new(BfstFst { fst }));
        Ok(())
    })
}

/// Writes an FSTv1 file.
///
/// # Safety
/// `fst` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bfst_fst_save(fst: *const BfstFst, path: *const c_char) -> BfstStatus {
    guard(|| {
        let f = ref_arg(fst, "fst")?;
        let path = str_arg(path, "path")?;
        let io = |e: std::io::Error| Failure::new(BfstStatus::Io, format!("{path}: {e}"));
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        f.fst.write_text(&mut w)?;
        w.flush().map_err(io)
    })
}

/// # Safety
/// `fst` must come from this library and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn bfst_fst_free(fst: *mut BfstFst) {
    if !fst.is_null() {
        drop(Box::from_raw(fst));
    }
}

/// # Safety
/// `fst` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn bfst_fst_num_states(fst: *const BfstFst) -> size_t {
    fst.as_ref().map_or(0, |f| f.fst.num_states())
}

/// # Safety
/// `fst` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn bfst_fst_num_arcs(fst: *const BfstFst) -> size_t {
    fst.as_ref().map_or(0, |f| f.fst.num_arcs())
}

/// First tag sequence the transducer gives for `n` class names, as tag names
/// separated by single spaces.
///
/// # Safety
/// Handles must be live, `classes` must point to `n` NUL-terminated strings,
/// and `out` must be writable. Free the result with [`bfst_string_free`].
#[no_mangle]
pub unsafe extern "C" fn bfst_fst_first(
    model: *const BfstModel,
    fst: *const BfstFst,
    classes: *const *const c_char,
    n: size_t,
    out: *mut *mut c_char,
) -> BfstStatus {
    guard(|| {
        out_arg(out, "out")?;
        let m = &ref_arg(model, "model")?.model;
        let f = &ref_arg(fst, "fst")?.fst;
        let input = class_args(m, classes, n)?;
        let binding = FstBinding::new(f, m)?;
        let tags = binding.first(m, &input)?.ok_or_else(|| Failure::new(BfstStatus::NoResult, "no result"))?;
        *out = tags_string(m, &tags)?;
        Ok(())
    })
}

/// Number of distinct tag sequences for `n` class names; fails with
/// `LimitExceeded` above `limit`.
///
/// # Safety
/// Handles must be live, `classes` must point to `n` NUL-terminated strings,
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bfst_fst_count(
    model: *const BfstModel,
    fst: *const BfstFst,
    classes: *const *const c_char,
    n: size_t,
    limit: size_t,
    out: *mut size_t,
) -> BfstStatus {
    guard(|| {
        out_arg(out, "out")?;
        let m = &ref_arg(model, "model")?.model;
        let f = &ref_arg(fst, "fst")?.fst;
        let input = class_args(m, classes, n)?;
        *out = FstBinding::new(f, m)?.count(m, &input, limit)?;
        Ok(())
    })
}

/// Most likely tag sequence under the HMM, formatted like [`bfst_fst_first`].
///
/// # Safety
/// `model` must be live, `classes` must point to `n` NUL-terminated strings,
/// and `out` must be writable. Free the result with [`bfst_string_free`].
#[no_mangle]
pub unsafe extern "C" fn bfst_viterbi(
    model: *const BfstModel,
    classes: *const *const c_char,
    n: size_t,
    out: *mut *mut c_char,
) -> BfstStatus {
    guard(|| {
        out_arg(out, "out")?;
        let m = &ref_arg(model, "model")?.model;
        let input = class_args(m, classes, n)?;
        let tags = viterbi(m, &input)?;
        *out = tags_string(m, &tags)?;
        Ok(())
    })
}

/// # Safety
/// `s` must be a string returned by this library, or null.
#[no_mangle]
pub unsafe extern "C" fn bfst_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

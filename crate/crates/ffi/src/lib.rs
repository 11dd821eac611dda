//! C ABI over `flood_detect`.
//!
//! Every fallible call returns an [`FdStatus`]; on anything but `FD_STATUS_OK`
//! a message is available from [`fd_last_error`] on the same thread. Handles
//! are opaque and must be released with their matching `_free` function.
//! Strings returned through out-parameters are owned by the caller and go
//! back through [`fd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use flood_detect::config::{validate_config, Preset, RunConfig};
use flood_detect::corpus::{load_dataset, Dataset, DatasetFormat, Label};
use flood_detect::eval::{score_binary, EvalReport};
use flood_detect::fusion::{decide, fuse};
use flood_detect::models::{load_model, PosteriorPair, TrainedModel};
use flood_detect::pipeline::execute_run;
use flood_detect::textprep::{preprocess, StopWords};
use flood_detect::Error;

/// Result codes. Values are stable.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    Dimension = 6,
    MissingFeatures = 7,
    EmptyVocabulary = 8,
    InvalidArgument = 9,
    Config = 10,
    MissingInput = 11,
    Panic = 99,
}

impl FdStatus {
    fn of(e: &Error) -> FdStatus {
        match e.kind() {
            "io" => FdStatus::Io,
            "parse" => FdStatus::Parse,
            "validation" => FdStatus::Validation,
            "dimension" => FdStatus::Dimension,
            "missing_features" => FdStatus::MissingFeatures,
            "empty_vocabulary" => FdStatus::EmptyVocabulary,
            "config" => FdStatus::Config,
            "missing_input" => FdStatus::MissingInput,
            _ => FdStatus::InvalidArgument,
        }
    }
}

/// Class posterior; the two fields sum to one.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdPosterior {
    pub p_neg: f64,
    pub p_pos: f64,
}

impl From<PosteriorPair> for FdPosterior {
    fn from(p: PosteriorPair) -> Self {
        FdPosterior {
            p_neg: p.p_neg,
            p_pos: p.p_pos,
        }
    }
}

/// Confusion counts and scores for the Relevant class.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FdEvalReport {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl From<&EvalReport> for FdEvalReport {
    fn from(r: &EvalReport) -> Self {
        FdEvalReport {
            tp: r.tp as u64,
            fp: r.fp as u64,
            fn_: r.fn_ as u64,
            tn: r.tn as u64,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
        }
    }
}

/// Opaque loaded dataset.
pub struct FdDataset(Dataset);

/// Opaque trained model.
pub struct FdModel(TrainedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("nul bytes removed")
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

struct Failure(FdStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(FdStatus::of(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(FdStatus::NullArgument, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_owned());
            FdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FdStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

// A null pointer is accepted for an empty slice.
unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

fn parse_labels(bits: &[u8], name: &str) -> Result<Vec<Label>, Failure> {
    bits.iter()
        .map(|&b| {
            Label::from_bit(b)
                .ok_or_else(|| Failure(FdStatus::InvalidArgument, format!("{name} holds {b}, expected 0 or 1")))
        })
        .collect()
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fd_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a CSV or JSON-lines dataset. `format` is `"csv"`, `"jsonl"` or null
/// to infer from the extension.
///
/// # Safety
/// `path` and a non-null `format` must be NUL-terminated strings; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_dataset_load(
    path: *const c_char,
    format: *const c_char,
    out: *mut *mut FdDataset,
) -> FdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let path = PathBuf::from(str_arg(path, "path")?);
        let format = match opt_str_arg(format, "format")? {
            Some(f) => f.parse::<DatasetFormat>()?,
            None => DatasetFormat::from_path(&path),
        };
        let ds = load_dataset(&path, format)?;
        *out = Box::into_raw(Box::new(FdDataset(ds)));
        Ok(())
    })
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live handle from [`fd_dataset_load`].
#[no_mangle]
pub unsafe extern "C" fn fd_dataset_len(ds: *const FdDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// Writes the Relevant, NotRelevant and unlabeled counts. Any out pointer may
/// be null.
///
/// # Safety
/// `ds` must be a live handle; non-null out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_dataset_counts(
    ds: *const FdDataset,
    positive: *mut usize,
    negative: *mut usize,
    unlabeled: *mut usize,
) -> FdStatus {
    guard(|| {
        let ds = &ds.as_ref().ok_or_else(|| null("ds"))?.0;
        for (p, v) in [
            (positive, ds.positive_count()),
            (negative, ds.negative_count()),
            (unlabeled, ds.unlabeled_count()),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fd_dataset_free(ds: *mut FdDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Loads a model written by `flood-detect train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_model_load(path: *const c_char, out: *mut *mut FdModel) -> FdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let model = load_model(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(FdModel(model)));
        Ok(())
    })
}

/// Input dimension the model expects, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fd_model_dim(model: *const FdModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dim())
}

/// Scores one feature vector of length `len`.
///
/// # Safety
/// `model` must be a live handle, `x` must point to `len` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_model_predict(
    model: *const FdModel,
    x: *const f64,
    len: usize,
    out: *mut FdPosterior,
) -> FdStatus {
    guard(|| {
        let model = &model.as_ref().ok_or_else(|| null("model"))?.0;
        let out = out_arg(out, "out")?;
        *out = model.predict(slice_arg(x, len, "x")?)?.into();
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fd_model_free(model: *mut FdModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Weighted mean of `n` posteriors.
///
/// # Safety
/// `posteriors` and `weights` must each point to `n` elements; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn fd_fuse(
    posteriors: *const FdPosterior,
    weights: *const f64,
    n: usize,
    out: *mut FdPosterior,
) -> FdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let posts: Vec<PosteriorPair> = slice_arg(posteriors, n, "posteriors")?
            .iter()
            .map(|p| PosteriorPair {
                p_neg: p.p_neg,
                p_pos: p.p_pos,
            })
            .collect();
        if let Some(bad) = posts.iter().find(|p| !p.is_valid()) {
            return Err(Failure(FdStatus::InvalidArgument, format!("invalid posterior {bad:?}")));
        }
        *out = fuse(&posts, slice_arg(weights, n, "weights")?)?.into();
        Ok(())
    })
}

/// 1 for Relevant, 0 for NotRelevant; ties are Relevant.
#[no_mangle]
pub extern "C" fn fd_decide(p: FdPosterior) -> c_int {
    c_int::from(
        decide(PosteriorPair {
            p_neg: p.p_neg,
            p_pos: p.p_pos,
        }) == Label::Relevant,
    )
}

/// Scores `n` 0/1 predictions against 0/1 labels.
///
/// # Safety
/// `labels` and `preds` must each point to `n` bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fd_score_binary(
    labels: *const u8,
    preds: *const u8,
    n: usize,
    out: *mut FdEvalReport,
) -> FdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let y = parse_labels(slice_arg(labels, n, "labels")?, "labels")?;
        let p = parse_labels(slice_arg(preds, n, "preds")?, "preds")?;
        *out = (&score_binary(&y, &p)?).into();
        Ok(())
    })
}

/// Executes a run config, writing its output files, and reports the fused
/// dev score. `preset` overrides the config's preset when non-null.
///
/// # Safety
/// `config` and a non-null `preset` must be NUL-terminated strings; `out`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn fd_run(config: *const c_char, preset: *const c_char, out: *mut FdEvalReport) -> FdStatus {
    guard(|| {
        let mut cfg = RunConfig::load(str_arg(config, "config")?)?;
        if let Some(p) = opt_str_arg(preset, "preset")? {
            cfg.preset = p.parse::<Preset>()?;
        }
        let result = execute_run(&validate_config(cfg)?)?;
        if let Some(out) = out.as_mut() {
            *out = (&result.report).into();
        }
        Ok(())
    })
}

/// Cleans `text` and writes its tokens joined by single spaces. A null
/// `stopwords_path` uses the built-in Italian list.
///
/// # Safety
/// `text` and a non-null `stopwords_path` must be NUL-terminated strings;
/// `out` must be writable. Free the result with [`fd_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fd_preprocess(
    text: *const c_char,
    stopwords_path: *const c_char,
    out: *mut *mut c_char,
) -> FdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let stop = match opt_str_arg(stopwords_path, "stopwords_path")? {
            Some(p) => StopWords::load(p)?,
            None => StopWords::italian(),
        };
        let joined = preprocess(text, &stop).join(" ");
        // tokens are alphanumeric, so no interior NUL is possible
        *out = CString::new(joined).expect("no NUL in tokens").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

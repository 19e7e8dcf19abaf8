//! C ABI over the `graphsparse` library.
//!
//! Datasets and models are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible function returns a
//! [`GsStatus`]; on failure [`gs_last_error_message`] describes the error on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use graphsparse::{fit, parse_dataset, predict, Error, FitConfig, GraphDataset, LossKind, SparseModel};

/// Parsed, validated graph dataset.
pub struct GsDataset(GraphDataset);

/// Fitted sparse model.
pub struct GsModel(SparseModel);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Numerical = 5,
    Io = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GsLoss {
    Logistic = 0,
    Squared = 1,
}

/// Training settings; obtain defaults from [`gs_fit_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct GsFitConfig {
    pub loss: GsLoss,
    pub lambda1: f64,
    pub lambda2: f64,
    pub sigma: f64,
    pub backtrack: f64,
    pub gamma: f64,
    pub gsr_v: f64,
    pub eps: f64,
    pub max_iter: u64,
    /// Pattern size limit in edges; negative means unlimited.
    pub max_edges: i64,
    pub prune: bool,
}

/// Summary of a finished fit.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct GsFitInfo {
    pub iterations: u64,
    pub converged: bool,
    pub objective: f64,
    pub train_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GsStatus {
    match e {
        Error::Parse { .. } => GsStatus::Parse,
        Error::Io(_) => GsStatus::Io,
        Error::Internal(_) | Error::Protocol(_) => GsStatus::Internal,
        e if e.is_numerical() => GsStatus::Numerical,
        _ => GsStatus::Validation,
    }
}

struct Fail(GsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside graphsparse");
            GsStatus::Internal
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(GsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(GsStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a dataset from NUL-terminated text in the `t # id label` format.
///
/// # Safety
/// `text` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_parse(text: *const c_char, out: *mut *mut GsDataset) -> GsStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        put(out, GsDataset(parse_dataset(text)?))
    })
}

/// Loads a dataset file.
///
/// # Safety
/// `path` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_load(path: *const c_char, out: *mut *mut GsDataset) -> GsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        put(out, GsDataset(GraphDataset::load(path)?))
    })
}

/// Number of graphs; 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_len(ds: *const GsDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.len())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_dataset_free(ds: *mut GsDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

#[no_mangle]
pub extern "C" fn gs_fit_config_default() -> GsFitConfig {
    let d = FitConfig::default();
    GsFitConfig {
        loss: GsLoss::Logistic,
        lambda1: d.lambda1,
        lambda2: d.lambda2,
        sigma: d.sigma,
        backtrack: d.backtrack,
        gamma: d.gamma,
        gsr_v: d.gsr_v,
        eps: d.eps,
        max_iter: d.max_iter as u64,
        max_edges: -1,
        prune: d.prune,
    }
}

fn to_config(c: &GsFitConfig) -> Result<(LossKind, FitConfig), Fail> {
    let max_iter = usize::try_from(c.max_iter).map_err(|_| Fail(GsStatus::Validation, "max_iter too large".into()))?;
    let loss = match c.loss {
        GsLoss::Logistic => LossKind::Logistic,
        GsLoss::Squared => LossKind::Squared,
    };
    Ok((
        loss,
        FitConfig {
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            sigma: c.sigma,
            backtrack: c.backtrack,
            gamma: c.gamma,
            gsr_v: c.gsr_v,
            eps: c.eps,
            max_iter,
            max_edges: usize::try_from(c.max_edges).ok(),
            prune: c.prune,
            ..FitConfig::default()
        },
    ))
}

/// Fits a model. `info` may be null.
///
/// # Safety
/// `ds` and `config` must be live pointers, `out` writable, `info` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gs_fit(
    ds: *const GsDataset,
    config: *const GsFitConfig,
    out: *mut *mut GsModel,
    info: *mut GsFitInfo,
) -> GsStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let (loss, cfg) = to_config(ref_arg(config, "config")?)?;
        if out.is_null() {
            return Err(null("output pointer"));
        }
        let res = fit(&ds.0, loss.loss(), &cfg)?;
        if let Some(info) = info.as_mut() {
            let last = res.trace.last();
            *info = GsFitInfo {
                iterations: res.trace.len() as u64,
                converged: res.converged,
                objective: last.map_or(res.initial_objective, |r| r.objective),
                train_error: last.map_or(f64::NAN, |r| r.train_error),
            };
        }
        put(out, GsModel(res.model))
    })
}

/// Writes the model output `mu` for every graph of `ds` into `out[0..len)`;
/// `len` must equal the dataset size.
///
/// # Safety
/// `model` and `ds` must be live handles and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gs_model_predict(
    model: *const GsModel,
    ds: *const GsDataset,
    out: *mut f64,
    len: usize,
) -> GsStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let ds = ref_arg(ds, "dataset")?;
        if out.is_null() {
            return Err(null("output buffer"));
        }
        if len != ds.0.len() {
            return Err(Fail(
                GsStatus::Validation,
                format!("buffer holds {len} values for {} graphs", ds.0.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(out, len);
        for (o, g) in out.iter_mut().zip(&ds.0.graphs) {
            *o = predict(&model.0, g);
        }
        Ok(())
    })
}

/// Intercept; NaN for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_model_intercept(model: *const GsModel) -> f64 {
    model.as_ref().map_or(f64::NAN, |m| m.0.intercept)
}

/// Number of features with nonzero coefficient; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gs_model_feature_count(model: *const GsModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.features.len())
}

/// # Safety
/// `model` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn gs_model_save(model: *const GsModel, path: *const c_char) -> GsStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let path = str_arg(path, "path")?;
        Ok(model.0.save(path)?)
    })
}

/// # Safety
/// `path` must be a valid C string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn gs_model_load(path: *const c_char, out: *mut *mut GsModel) -> GsStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        put(out, GsModel(SparseModel::load(path)?))
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gs_model_free(model: *mut GsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn error_message_is_cleared_on_success() {
        set_error("boom");
        assert_eq!(guard(|| Ok(())), GsStatus::Ok);
        let msg = unsafe { CStr::from_ptr(gs_last_error_message()) };
        assert!(msg.to_bytes().is_empty());
    }

    #[test]
    fn panics_become_internal() {
        assert_eq!(guard(|| panic!("x")), GsStatus::Internal);
    }

    #[test]
    fn config_maps_negative_limit_to_unlimited() {
        let (_, cfg) = to_config(&gs_fit_config_default()).ok().unwrap();
        assert_eq!(cfg.max_edges, None);
        let mut c = gs_fit_config_default();
        c.max_edges = 3;
        assert_eq!(to_config(&c).ok().unwrap().1.max_edges, Some(3));
    }

    #[test]
    fn null_handles_are_reported() {
        let mut out = ptr::null_mut();
        let s = unsafe { gs_dataset_parse(ptr::null(), &mut out) };
        assert_eq!(s, GsStatus::NullPointer);
        assert!(out.is_null());
    }
}

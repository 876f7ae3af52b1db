//! C ABI for reuse-forge.
//!
//! Handles are opaque pointers created and released by this library.
//! Every fallible call returns an [`RfStatus`]; on failure the message is
//! kept per thread and read with [`rf_last_error_message`]. Strings handed
//! out by the library are released with [`rf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use reuse_forge::eval::{segment_similarity, welch_t_from_summary, SampleSummary};
use reuse_forge::gateway::RecordedBackend;
use reuse_forge::{Error, Gateway, HashingEncoder, Method, MethodLibrary, Query, ReuseConfig, ReuseEngine};

/// Status codes; the non-zero values match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    /// The query ran but no method was selected.
    NoneFound = 1,
    InvalidArgument = 2,
    Io = 3,
    Backend = 4,
    Parse = 5,
    NullPointer = 6,
    Panic = 7,
}

/// Method library handle.
pub struct RfLibrary {
    inner: MethodLibrary,
}

/// Gateway handle replaying recorded transcripts.
pub struct RfGateway {
    inner: Gateway,
}

/// Welch two-sample test result.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RfWelch {
    pub t: f64,
    pub df: f64,
    pub p_two_tailed: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn status_for(err: &Error) -> RfStatus {
    match err {
        e if e.is_backend() => RfStatus::Backend,
        Error::Io { .. } => RfStatus::Io,
        Error::Parse { .. } | Error::UnparseableResponse | Error::UnparseableVerdict(_) => RfStatus::Parse,
        _ => RfStatus::InvalidArgument,
    }
}

struct Failure(RfStatus, String);

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure(status_for(&err), err.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RfStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(RfStatus::InvalidArgument, message.into())
}

/// Runs `body`, recording any failure or panic as the thread's last error.
fn guard(body: impl FnOnce() -> Result<RfStatus, Failure>) -> RfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RfStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or point to a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn hand_out(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("output contains an interior NUL"))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn rf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// New empty library; release with [`rf_library_free`].
#[no_mangle]
pub extern "C" fn rf_library_new() -> *mut RfLibrary {
    Box::into_raw(Box::new(RfLibrary {
        inner: MethodLibrary::new(),
    }))
}

/// Loads a JSON-lines library file into `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_library_load(path: *const c_char, out: *mut *mut RfLibrary) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = MethodLibrary::load(text(path, "path")?)?;
        *out = Box::into_raw(Box::new(RfLibrary { inner }));
        Ok(RfStatus::Ok)
    })
}

/// Writes the library as JSON lines.
///
/// # Safety
/// `library` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rf_library_save(library: *const RfLibrary, path: *const c_char) -> RfStatus {
    guard(|| {
        let library = library.as_ref().ok_or_else(|| null("library"))?;
        library.inner.save(text(path, "path")?)?;
        Ok(RfStatus::Ok)
    })
}

/// Adds a direct method. `scope_csv` may be null; otherwise it holds
/// comma-separated scope labels.
///
/// # Safety
/// `library` must be a live handle; the strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn rf_library_add(
    library: *mut RfLibrary,
    id: *const c_char,
    question: *const c_char,
    solution: *const c_char,
    scope_csv: *const c_char,
) -> RfStatus {
    guard(|| {
        let library = library.as_mut().ok_or_else(|| null("library"))?;
        let mut method = Method::new(
            text(id, "id")?,
            text(question, "question")?,
            text(solution, "solution")?,
        );
        if !scope_csv.is_null() {
            method = method.with_scope(labels(text(scope_csv, "scope")?));
        }
        library.inner.add(method)?;
        Ok(RfStatus::Ok)
    })
}

/// Number of methods; zero for a null handle.
///
/// # Safety
/// `library` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_library_len(library: *const RfLibrary) -> usize {
    library.as_ref().map_or(0, |l| l.inner.len())
}

/// # Safety
/// `library` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_library_free(library: *mut RfLibrary) {
    if !library.is_null() {
        drop(Box::from_raw(library));
    }
}

/// Opens a gateway that replays the transcript file at `path`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_gateway_recorded(path: *const c_char, out: *mut *mut RfGateway) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let backend = RecordedBackend::open(text(path, "path")?)?;
        *out = Box::into_raw(Box::new(RfGateway {
            inner: Gateway::new(backend),
        }));
        Ok(RfStatus::Ok)
    })
}

/// # Safety
/// `gateway` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_gateway_free(gateway: *mut RfGateway) {
    if !gateway.is_null() {
        drop(Box::from_raw(gateway));
    }
}

fn labels(csv: &str) -> Vec<String> {
    csv.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Runs the reuse pipeline with default settings and writes the outcome
/// as JSON to `*out_json` (free with [`rf_string_free`]). Returns
/// `RF_STATUS_OK` when a method was selected and `RF_STATUS_NONE_FOUND`
/// otherwise; the JSON is written in both cases.
///
/// # Safety
/// Handles must be live; strings NUL-terminated (`scope_csv` may be
/// null); `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_query(
    gateway: *const RfGateway,
    library: *const RfLibrary,
    question: *const c_char,
    scope_csv: *const c_char,
    out_json: *mut *mut c_char,
) -> RfStatus {
    guard(|| {
        let gateway = gateway.as_ref().ok_or_else(|| null("gateway"))?;
        let library = library.as_ref().ok_or_else(|| null("library"))?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let mut query = Query::new(text(question, "question")?);
        if !scope_csv.is_null() {
            query = query.with_scope(labels(text(scope_csv, "scope")?));
        }
        let engine = ReuseEngine::new(&gateway.inner, ReuseConfig::default())?;
        let outcome = engine.solve(&query, &library.inner)?;
        let json = serde_json::to_string(&outcome).map_err(|e| invalid(e.to_string()))?;
        *out_json = hand_out(json)?;
        Ok(if outcome.is_selected() {
            RfStatus::Ok
        } else {
            RfStatus::NoneFound
        })
    })
}

/// Welch's unequal-variance t-test from summary statistics.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_welch_summary(
    mean_a: f64,
    sd_a: f64,
    n_a: usize,
    mean_b: f64,
    sd_b: f64,
    n_b: usize,
    out: *mut RfWelch,
) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let r = welch_t_from_summary(
            SampleSummary::new(mean_a, sd_a, n_a),
            SampleSummary::new(mean_b, sd_b, n_b),
        )?;
        *out = RfWelch {
            t: r.t,
            df: r.df,
            p_two_tailed: r.p_two_tailed,
        };
        Ok(RfStatus::Ok)
    })
}

/// Cosine similarity of an output text to a reference text under the
/// hashing encoder of dimension `dim`.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_segment_similarity(
    output: *const c_char,
    reference: *const c_char,
    dim: usize,
    out: *mut f64,
) -> RfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let encoder = HashingEncoder::new(dim)?;
        *out = segment_similarity(text(output, "output")?, text(reference, "reference")?, &encoder)?;
        Ok(RfStatus::Ok)
    })
}

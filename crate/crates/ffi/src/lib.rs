//! C ABI for the basin-copilot engine.
//!
//! Every function returns a [`BcStatus`]. Results that are documents come
//! back as NUL-terminated UTF-8 JSON owned by the library; release them with
//! [`bc_string_free`]. On failure the message is available from
//! [`bc_last_error`] on the same thread until the next call.
//!
//! The engine handle is opaque and may be shared between threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use basin_copilot::eval::{ragas_score, EvalSample};
use basin_copilot::gateway::{Engine, EngineError};

/// Result codes shared by all functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    /// Unknown session id.
    NotFound = 4,
    /// Arguments were well formed but rejected (empty message, unknown option, ...).
    InvalidInput = 5,
    /// The chat, embedding or judge provider failed.
    Provider = 6,
    /// Config, index or dataset could not be loaded.
    Startup = 7,
    Io = 8,
    /// A Rust panic was caught at the boundary.
    Panic = 9,
}

/// Opaque engine handle.
pub struct BcEngine {
    engine: Engine,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(BcStatus, String);

fn set_error(msg: Option<String>) {
    let c = msg.map(|m| CString::new(m.replace('\0', " ")).expect("NUL bytes removed"));
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn engine_failure(e: EngineError) -> Failure {
    let status = match &e {
        EngineError::SessionNotFound(_) => BcStatus::NotFound,
        EngineError::Provider(_) => BcStatus::Provider,
        EngineError::Store(_) => BcStatus::Io,
        EngineError::Index(_) | EngineError::Dataset(_) | EngineError::Startup(_) => BcStatus::Startup,
        _ => BcStatus::InvalidInput,
    };
    Failure(status, e.to_string())
}

/// Runs `f` behind a panic guard and records the error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            BcStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(Some(msg));
            status
        }
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            set_error(Some(format!("panic: {}", msg.unwrap_or_default())));
            BcStatus::Panic
        }
    }
}

/// # Safety
/// `p` is NULL or a valid NUL-terminated string.
unsafe fn required<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(BcStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(BcStatus::InvalidUtf8, format!("{what}: {e}")))
}

/// # Safety
/// `p` is NULL or a valid NUL-terminated string.
unsafe fn optional<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        required(p, what).map(Some)
    }
}

/// # Safety
/// `engine` is NULL or a live handle from [`bc_engine_open`].
unsafe fn handle<'a>(engine: *const BcEngine) -> Result<&'a Engine, Failure> {
    engine.as_ref().map(|h| &h.engine).ok_or_else(|| Failure(BcStatus::NullArgument, "engine is NULL".into()))
}

/// # Safety
/// `out` is NULL or valid for a pointer write.
unsafe fn write_json<T: serde::Serialize>(out: *mut *mut c_char, value: &T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(BcStatus::NullArgument, "output pointer is NULL".into()));
    }
    let text = serde_json::to_string(value).map_err(|e| Failure(BcStatus::InvalidJson, e.to_string()))?;
    *out = CString::new(text).map_err(|e| Failure(BcStatus::InvalidJson, e.to_string()))?.into_raw();
    Ok(())
}

/// Opens an engine from a TOML config file. On success `*out` holds a
/// handle to release with [`bc_engine_close`].
///
/// # Safety
/// `config_path` is a NUL-terminated string; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bc_engine_open(config_path: *const c_char, out: *mut *mut BcEngine) -> BcStatus {
    guard(|| {
        let path = required(config_path, "config_path")?;
        if out.is_null() {
            return Err(Failure(BcStatus::NullArgument, "output pointer is NULL".into()));
        }
        let engine = Engine::build_from_file(Path::new(path)).map_err(engine_failure)?;
        *out = Box::into_raw(Box::new(BcEngine { engine }));
        Ok(())
    })
}

/// Releases an engine handle. NULL is ignored.
///
/// # Safety
/// `engine` is NULL or a handle from [`bc_engine_open`] not yet closed.
#[no_mangle]
pub unsafe extern "C" fn bc_engine_close(engine: *mut BcEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Creates a session; `session_id` may be NULL for a generated id. Writes
/// `{"session_id", "created_at"}`.
///
/// # Safety
/// Pointers are NULL or valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn bc_session_create(engine: *const BcEngine, session_id: *const c_char, out_json: *mut *mut c_char) -> BcStatus {
    guard(|| {
        let engine = handle(engine)?;
        let info = engine.create_session(optional(session_id, "session_id")?).map_err(engine_failure)?;
        write_json(out_json, &info)
    })
}

/// Sends one user message and writes the answer JSON, the same document the
/// HTTP gateway returns. `option` may be NULL.
///
/// # Safety
/// Pointers are NULL or valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn bc_session_send(
    engine: *const BcEngine,
    session_id: *const c_char,
    text: *const c_char,
    option: *const c_char,
    out_json: *mut *mut c_char,
) -> BcStatus {
    guard(|| {
        let engine = handle(engine)?;
        let answer = engine
            .send_message(required(session_id, "session_id")?, required(text, "text")?, optional(option, "option")?)
            .map_err(engine_failure)?;
        write_json(out_json, &answer)
    })
}

/// Writes the session transcript JSON.
///
/// # Safety
/// Pointers are NULL or valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn bc_session_transcript(engine: *const BcEngine, session_id: *const c_char, out_json: *mut *mut c_char) -> BcStatus {
    guard(|| {
        let engine = handle(engine)?;
        let t = engine.transcript(required(session_id, "session_id")?).map_err(engine_failure)?;
        write_json(out_json, &t)
    })
}

/// Writes the tool descriptors as a JSON array of function schemas.
///
/// # Safety
/// Pointers are NULL or valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn bc_engine_tools(engine: *const BcEngine, out_json: *mut *mut c_char) -> BcStatus {
    guard(|| write_json(out_json, &handle(engine)?.tools()))
}

/// Scores a JSON array of evaluation samples with the engine's judge and
/// embedder and writes the metric report JSON.
///
/// # Safety
/// Pointers are NULL or valid as documented on the module.
#[no_mangle]
pub unsafe extern "C" fn bc_evaluate(engine: *const BcEngine, samples_json: *const c_char, out_json: *mut *mut c_char) -> BcStatus {
    guard(|| {
        let engine = handle(engine)?;
        let samples: Vec<EvalSample> =
            serde_json::from_str(required(samples_json, "samples_json")?).map_err(|e| Failure(BcStatus::InvalidJson, e.to_string()))?;
        write_json(out_json, &engine.evaluate(&samples))
    })
}

/// Harmonic mean of four metric means (faithfulness, answer relevancy,
/// context precision, context recall). Non-positive inputs give 0.
///
/// # Safety
/// `means` points to four doubles; `out` is valid for a write.
#[no_mangle]
pub unsafe extern "C" fn bc_ragas_score(means: *const f64, out: *mut f64) -> BcStatus {
    guard(|| {
        if means.is_null() || out.is_null() {
            return Err(Failure(BcStatus::NullArgument, "means or out is NULL".into()));
        }
        let m = std::slice::from_raw_parts(means, 4);
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Failure(BcStatus::InvalidInput, "means must be finite".into()));
        }
        *out = ragas_score([m[0], m[1], m[2], m[3]]);
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` is NULL or a string returned through an `out_json` argument and not
/// yet freed.
#[no_mangle]
pub unsafe extern "C" fn bc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or NULL after a
/// successful call. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn bc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

//! C ABI for the qualitative action-inference engine.
//!
//! Scenes and solution sets cross the boundary as opaque handles; every
//! fallible call returns an [`AipStatus`] and writes its result through an
//! out-pointer. Strings returned by the library are heap-allocated and must
//! be released with [`aip_string_free`]. All entry points catch panics and
//! report them as `InternalError`; the per-thread detail message is
//! available from [`aip_last_error`].
//!
//! The matching header `include/aip.h` is generated at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aip_core::report::RunReport;
use aip_core::scene::Scene;
use aip_core::sign::QuantizationConfig;
use aip_core::solver::{solve, Heuristics, SolveError, Solution, SolverConfig, VertexOrder};

/// Result of an API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AipStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The scene document failed to parse or validate.
    ParseError = 3,
    /// The configuration was rejected (bad epsilon or subset cap).
    BadConfig = 4,
    /// Heuristic 2 is enabled but no object in the scene changed state.
    NoMovedObject = 5,
    /// The solver gave up (per-object force set beyond the subset cap).
    SolveError = 6,
    /// An index was out of range.
    OutOfRange = 7,
    /// An internal invariant failed; see `aip_last_error`.
    InternalError = 8,
}

/// Solver options in C layout. `max_solutions == 0` means unlimited.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AipSolveOptions {
    /// Cancel-only combination for forces assigned during the search.
    pub use_h1: bool,
    /// Hypothesize actions only on objects that moved.
    pub use_h2: bool,
    /// Cap on per-object force sets; must be at least 1.
    pub subset_cap: u32,
    pub max_solutions: u64,
}

pub struct AipScene {
    scene: Scene,
    raw: String,
    epsilon: f64,
}

pub struct AipSolutionSet {
    solutions: Vec<Solution>,
    config: SolverConfig,
    scene_bytes: Vec<u8>,
    epsilon: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let message = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

fn guard<F: FnOnce() -> AipStatus>(body: F) -> AipStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(panic) => {
            let detail = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(detail);
            AipStatus::InternalError
        }
    }
}

fn write_string(out: *mut *mut c_char, value: String) -> AipStatus {
    match CString::new(value) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            AipStatus::Ok
        }
        Err(_) => {
            set_error("string contained an interior NUL");
            AipStatus::InternalError
        }
    }
}

/// Default solver options: both heuristics on, subset cap 12, unlimited
/// solutions.
#[no_mangle]
pub extern "C" fn aip_solve_options_default() -> AipSolveOptions {
    let cfg = SolverConfig::default();
    AipSolveOptions {
        use_h1: cfg.heuristics.h1,
        use_h2: cfg.heuristics.h2,
        subset_cap: cfg.subset_cap as u32,
        max_solutions: 0,
    }
}

/// Parses and validates a scene document (format "aip-scene/1"); numeric
/// geometry is quantized with the given dead-band. On success writes a new
/// handle to `out`; free it with [`aip_scene_free`].
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aip_scene_parse(
    json: *const c_char,
    epsilon: f64,
    out: *mut *mut AipScene,
) -> AipStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return AipStatus::NullArgument;
        }
        let Ok(text) = unsafe { CStr::from_ptr(json) }.to_str() else {
            return AipStatus::InvalidUtf8;
        };
        let cfg = match QuantizationConfig::new(epsilon) {
            Ok(cfg) => cfg,
            Err(e) => {
                set_error(e.to_string());
                return AipStatus::BadConfig;
            }
        };
        match Scene::parse_json(text, cfg) {
            Ok(scene) => {
                let handle =
                    Box::new(AipScene { scene, raw: text.to_string(), epsilon: cfg.epsilon });
                unsafe { *out = Box::into_raw(handle) };
                AipStatus::Ok
            }
            Err(e) => {
                set_error(e.to_string());
                AipStatus::ParseError
            }
        }
    })
}

/// Releases a scene handle. Null is ignored.
///
/// # Safety
/// `scene` must have come from [`aip_scene_parse`] and not been freed.
#[no_mangle]
pub unsafe extern "C" fn aip_scene_free(scene: *mut AipScene) {
    if !scene.is_null() {
        drop(unsafe { Box::from_raw(scene) });
    }
}

/// Number of objects in a parsed scene (0 for null).
///
/// # Safety
/// `scene` must be null or a live handle from [`aip_scene_parse`].
#[no_mangle]
pub unsafe extern "C" fn aip_scene_object_count(scene: *const AipScene) -> usize {
    unsafe { scene.as_ref() }.map_or(0, |s| s.scene.objects.len())
}

/// Number of contact points in a parsed scene (0 for null).
///
/// # Safety
/// `scene` must be null or a live handle from [`aip_scene_parse`].
#[no_mangle]
pub unsafe extern "C" fn aip_scene_contact_count(scene: *const AipScene) -> usize {
    unsafe { scene.as_ref() }.map_or(0, |s| s.scene.contacts.len())
}

/// Runs the inference. On success writes a solution-set handle to `out`;
/// free it with [`aip_solution_set_free`].
///
/// # Safety
/// All pointers must be valid; `scene` must be a live scene handle.
#[no_mangle]
pub unsafe extern "C" fn aip_solve(
    scene: *const AipScene,
    options: *const AipSolveOptions,
    out: *mut *mut AipSolutionSet,
) -> AipStatus {
    guard(|| {
        let (Some(scene), Some(options)) = (unsafe { scene.as_ref() }, unsafe { options.as_ref() })
        else {
            return AipStatus::NullArgument;
        };
        if out.is_null() {
            return AipStatus::NullArgument;
        }
        let config = SolverConfig {
            heuristics: Heuristics { h1: options.use_h1, h2: options.use_h2 },
            subset_cap: options.subset_cap as usize,
            max_solutions: (options.max_solutions > 0).then_some(options.max_solutions as usize),
            vertex_order: VertexOrder::PreferKnown,
        };
        match solve(&scene.scene, &config) {
            Ok(solutions) => {
                let handle = Box::new(AipSolutionSet {
                    solutions,
                    config,
                    scene_bytes: scene.raw.clone().into_bytes(),
                    epsilon: scene.epsilon,
                });
                unsafe { *out = Box::into_raw(handle) };
                AipStatus::Ok
            }
            Err(SolveError::NoMovedObject) => {
                set_error(SolveError::NoMovedObject.to_string());
                AipStatus::NoMovedObject
            }
            Err(SolveError::BadCap(n)) => {
                set_error(SolveError::BadCap(n).to_string());
                AipStatus::BadConfig
            }
            Err(e) => {
                set_error(e.to_string());
                AipStatus::SolveError
            }
        }
    })
}

/// Releases a solution-set handle. Null is ignored.
///
/// # Safety
/// `set` must have come from [`aip_solve`] and not been freed.
#[no_mangle]
pub unsafe extern "C" fn aip_solution_set_free(set: *mut AipSolutionSet) {
    if !set.is_null() {
        drop(unsafe { Box::from_raw(set) });
    }
}

/// Number of solutions in a set (0 for null).
///
/// # Safety
/// `set` must be null or a live handle from [`aip_solve`].
#[no_mangle]
pub unsafe extern "C" fn aip_solution_count(set: *const AipSolutionSet) -> usize {
    unsafe { set.as_ref() }.map_or(0, |s| s.solutions.len())
}

/// Human-readable action of one solution ("push object ... in direction
/// ... at locus ..."). The string must be freed with [`aip_string_free`].
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aip_solution_action(
    set: *const AipSolutionSet,
    index: usize,
    out: *mut *mut c_char,
) -> AipStatus {
    guard(|| {
        let Some(set) = (unsafe { set.as_ref() }) else {
            return AipStatus::NullArgument;
        };
        if out.is_null() {
            return AipStatus::NullArgument;
        }
        match set.solutions.get(index) {
            Some(sol) => write_string(out, sol.action.to_string()),
            None => AipStatus::OutOfRange,
        }
    })
}

/// One solution as JSON (action, grouped assignments, derivation trace).
/// The string must be freed with [`aip_string_free`].
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aip_solution_json(
    set: *const AipSolutionSet,
    index: usize,
    out: *mut *mut c_char,
) -> AipStatus {
    guard(|| {
        let Some(set) = (unsafe { set.as_ref() }) else {
            return AipStatus::NullArgument;
        };
        if out.is_null() {
            return AipStatus::NullArgument;
        }
        match set.solutions.get(index) {
            Some(sol) => match serde_json::to_string_pretty(sol) {
                Ok(json) => write_string(out, json),
                Err(e) => {
                    set_error(e.to_string());
                    AipStatus::InternalError
                }
            },
            None => AipStatus::OutOfRange,
        }
    })
}

/// The whole run as a report document (scene digest, configuration echo,
/// solutions with traces). The string must be freed with
/// [`aip_string_free`].
///
/// # Safety
/// `set` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aip_report_json(
    set: *const AipSolutionSet,
    out: *mut *mut c_char,
) -> AipStatus {
    guard(|| {
        let Some(set) = (unsafe { set.as_ref() }) else {
            return AipStatus::NullArgument;
        };
        if out.is_null() {
            return AipStatus::NullArgument;
        }
        let report = RunReport::new(
            &set.scene_bytes,
            &set.config,
            set.epsilon,
            set.solutions.clone(),
            0,
        );
        write_string(out, report.to_json())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must have been returned by this library and not been freed.
#[no_mangle]
pub unsafe extern "C" fn aip_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn aip_status_message(status: AipStatus) -> *const c_char {
    let message: &'static CStr = match status {
        AipStatus::Ok => c"ok",
        AipStatus::NullArgument => c"a required argument was null",
        AipStatus::InvalidUtf8 => c"string argument was not valid UTF-8",
        AipStatus::ParseError => c"scene failed to parse or validate",
        AipStatus::BadConfig => c"configuration rejected",
        AipStatus::NoMovedObject => c"heuristic 2 is enabled but no object changed state",
        AipStatus::SolveError => c"solver gave up",
        AipStatus::OutOfRange => c"index out of range",
        AipStatus::InternalError => c"internal error",
    };
    message.as_ptr()
}

/// Detail message of the most recent failure on this thread, or null. The
/// string must be freed with [`aip_string_free`].
#[no_mangle]
pub extern "C" fn aip_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map_or(ptr::null_mut(), |s| s.clone().into_raw())
    })
}

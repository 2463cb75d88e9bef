//! C ABI over the energy model, the classical solvers, and the low-energy
//! ensemble analysis.
//!
//! Every fallible call returns an [`HrStatus`]. On failure a message is kept
//! per thread and can be read with [`hr_last_error_message`]. Handles are
//! opaque and must be released with their matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hubo_reason::ensemble::{analyze, SelectionMode, StabilityParams};
use hubo_reason::hubo::HuboModel;
use hubo_reason::solvers::{
    brute_force, solve_native, solve_reduced, AnnealSchedule, BruteForceOptions, SampleSet,
    Spectrum,
};
use hubo_reason::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    InvalidConfig = 4,
    EmptyModel = 5,
    LimitExceeded = 6,
    OutOfRange = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Binary energy model.
pub struct HrModel(HuboModel);

/// Solver output: distinct assignments with energies and multiplicities.
pub struct HrSampleSet(SampleSet);

/// Annealing schedule. A `t_start` of zero or less selects the automatic
/// starting temperature.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrAnnealParams {
    pub t_start: f64,
    pub t_end: f64,
    pub sweeps: u64,
    pub restarts: u64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: HrStatus, msg: impl Into<String>) -> HrStatus {
    set_error(msg);
    status
}

fn from_error(e: &Error) -> HrStatus {
    let status = match e.root() {
        Error::Config(_) => HrStatus::InvalidConfig,
        Error::EmptyModel => HrStatus::EmptyModel,
        Error::LimitExceeded { .. } => HrStatus::LimitExceeded,
        _ => HrStatus::InvalidInput,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into [`HrStatus::Panic`] and clearing the
/// thread's error message on success.
fn guard(f: impl FnOnce() -> HrStatus) -> HrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(HrStatus::Ok) => {
            clear_error();
            HrStatus::Ok
        }
        Ok(s) => s,
        Err(_) => fail(HrStatus::Panic, "internal panic"),
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(HrStatus::NullPointer, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, HrStatus> {
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(HrStatus::InvalidUtf8, format!("string is not UTF-8: {e}")))
}

fn into_c_string(s: String, out: *mut *mut c_char) -> HrStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: callers check `out` for null before reaching here.
            unsafe { *out = c.into_raw() };
            HrStatus::Ok
        }
        Err(_) => fail(HrStatus::InvalidInput, "output contains a NUL byte"),
    }
}

/// Message for the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates an empty model over `num_vars` binary variables.
///
/// # Safety
/// `out` must be a valid pointer to write the handle to.
#[no_mangle]
pub unsafe extern "C" fn hr_model_new(num_vars: usize, out: *mut *mut HrModel) -> HrStatus {
    guard(|| {
        non_null!(out);
        *out = Box::into_raw(Box::new(HrModel(HuboModel::new(num_vars))));
        HrStatus::Ok
    })
}

/// Parses a model from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_model_from_json(
    json: *const c_char,
    out: *mut *mut HrModel,
) -> HrStatus {
    guard(|| {
        non_null!(json, out);
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match HuboModel::from_json(text) {
            Ok(m) => {
                *out = Box::into_raw(Box::new(HrModel(m)));
                HrStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Serializes a model. Free the result with [`hr_string_free`].
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_model_to_json(
    model: *const HrModel,
    out: *mut *mut c_char,
) -> HrStatus {
    guard(|| {
        non_null!(model, out);
        match (*model).0.to_json() {
            Ok(s) => into_c_string(s, out),
            Err(e) => from_error(&e),
        }
    })
}

/// Adds `coeff` to the term over `vars[0..len]`. Indices may be unsorted.
///
/// # Safety
/// `model` must be a live handle; `vars` must point to `len` readable indices.
#[no_mangle]
pub unsafe extern "C" fn hr_model_add_term(
    model: *mut HrModel,
    vars: *const usize,
    len: usize,
    coeff: f64,
) -> HrStatus {
    guard(|| {
        non_null!(model, vars);
        let vars = std::slice::from_raw_parts(vars, len);
        match (*model).0.add_term(vars, coeff) {
            Ok(()) => HrStatus::Ok,
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hr_model_num_vars(model: *const HrModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.num_vars())
}

/// Number of stored nonzero terms.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hr_model_num_terms(model: *const HrModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.len())
}

/// Energy of one assignment given as `len` bytes, nonzero meaning set.
///
/// # Safety
/// `model` must be a live handle; `bits` must point to `len` readable bytes;
/// `energy` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_model_evaluate(
    model: *const HrModel,
    bits: *const u8,
    len: usize,
    energy: *mut f64,
) -> HrStatus {
    guard(|| {
        non_null!(model, bits, energy);
        let assignment: Vec<bool> = std::slice::from_raw_parts(bits, len)
            .iter()
            .map(|&b| b != 0)
            .collect();
        match (*model).0.evaluate(&assignment) {
            Ok(e) => {
                *energy = e;
                HrStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// # Safety
/// `model` must be a handle from this library or null, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_model_free(model: *mut HrModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Default schedule: automatic start temperature, t_end 1e-3, 2000 sweeps, 64 restarts, seed 0.
#[no_mangle]
pub extern "C" fn hr_anneal_params_default() -> HrAnnealParams {
    let d = AnnealSchedule::default();
    HrAnnealParams {
        t_start: 0.0,
        t_end: d.t_end,
        sweeps: d.sweeps as u64,
        restarts: d.restarts as u64,
        seed: d.seed,
    }
}

fn schedule(p: &HrAnnealParams) -> Result<AnnealSchedule, HrStatus> {
    let to_usize = |v: u64, name: &str| {
        usize::try_from(v)
            .map_err(|_| fail(HrStatus::InvalidConfig, format!("{name} is too large")))
    };
    Ok(AnnealSchedule {
        t_start: (p.t_start > 0.0).then_some(p.t_start),
        t_end: p.t_end,
        sweeps: to_usize(p.sweeps, "sweeps")?,
        restarts: to_usize(p.restarts, "restarts")?,
        seed: p.seed,
    })
}

/// Simulated annealing. With `reduced` set, anneals the pair-reduced spin
/// form and re-scores on the original model. `params` may be null for defaults.
///
/// # Safety
/// `model` must be a live handle; `params` null or readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_anneal(
    model: *const HrModel,
    params: *const HrAnnealParams,
    reduced: bool,
    out: *mut *mut HrSampleSet,
) -> HrStatus {
    guard(|| {
        non_null!(model, out);
        let p = params
            .as_ref()
            .copied()
            .unwrap_or_else(|| hr_anneal_params_default());
        let sched = match schedule(&p) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let m = &(*model).0;
        let result = if reduced {
            solve_reduced(m, &sched)
        } else {
            solve_native(m, &sched)
        };
        match result {
            Ok(set) => {
                *out = Box::into_raw(Box::new(HrSampleSet(set)));
                HrStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Exhaustive search up to `limit` variables. `lowest` of zero returns the
/// ground states only; otherwise the `lowest` lowest assignments plus any
/// ground-state ties.
///
/// # Safety
/// `model` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_brute_force(
    model: *const HrModel,
    limit: usize,
    lowest: usize,
    out: *mut *mut HrSampleSet,
) -> HrStatus {
    guard(|| {
        non_null!(model, out);
        let options = BruteForceOptions {
            limit,
            spectrum: if lowest == 0 {
                Spectrum::Ground
            } else {
                Spectrum::Lowest(lowest)
            },
        };
        match brute_force(&(*model).0, &options) {
            Ok(set) => {
                *out = Box::into_raw(Box::new(HrSampleSet(set)));
                HrStatus::Ok
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Number of distinct samples.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hr_sampleset_len(set: *const HrSampleSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Assignment length shared by every sample, or 0 for an empty set.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hr_sampleset_num_vars(set: *const HrSampleSet) -> usize {
    set.as_ref()
        .and_then(|s| s.0.samples.first())
        .map_or(0, |s| s.bits.len())
}

/// Copies sample `index`. `bits` receives one byte per variable (1 set,
/// 0 clear) and must hold at least [`hr_sampleset_num_vars`] bytes; it may be
/// null when only the energy and multiplicity are wanted. `energy` and
/// `multiplicity` may also be null.
///
/// # Safety
/// `set` must be a live handle; non-null output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn hr_sampleset_get(
    set: *const HrSampleSet,
    index: usize,
    bits: *mut u8,
    bits_len: usize,
    energy: *mut f64,
    multiplicity: *mut u64,
) -> HrStatus {
    guard(|| {
        non_null!(set);
        let samples = &(*set).0.samples;
        let Some(s) = samples.get(index) else {
            return fail(
                HrStatus::OutOfRange,
                format!("sample {index} requested from a set of {}", samples.len()),
            );
        };
        if !bits.is_null() {
            if bits_len < s.bits.len() {
                return fail(
                    HrStatus::BufferTooSmall,
                    format!("bits buffer holds {bits_len}, need {}", s.bits.len()),
                );
            }
            let dst = std::slice::from_raw_parts_mut(bits, s.bits.len());
            for (d, &b) in dst.iter_mut().zip(&s.bits) {
                *d = u8::from(b);
            }
        }
        if let Some(e) = energy.as_mut() {
            *e = s.energy;
        }
        if let Some(m) = multiplicity.as_mut() {
            *m = s.multiplicity;
        }
        HrStatus::Ok
    })
}

/// Lowest energy in the set.
///
/// # Safety
/// `set` must be a live handle; `energy` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_sampleset_min_energy(
    set: *const HrSampleSet,
    energy: *mut f64,
) -> HrStatus {
    guard(|| {
        non_null!(set, energy);
        match (*set).0.min_energy() {
            Some(e) => {
                *energy = e;
                HrStatus::Ok
            }
            None => fail(HrStatus::InvalidInput, "sample set is empty"),
        }
    })
}

/// # Safety
/// `set` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_sampleset_to_json(
    set: *const HrSampleSet,
    out: *mut *mut c_char,
) -> HrStatus {
    guard(|| {
        non_null!(set, out);
        match serde_json::to_string(&(*set).0) {
            Ok(s) => into_c_string(s, out),
            Err(e) => fail(HrStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `set` must be a handle from this library or null, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hr_sampleset_free(set: *mut HrSampleSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

fn stability_params(quantile: f64, tau: f64, ground_state: bool) -> StabilityParams {
    StabilityParams {
        low_energy_quantile: quantile,
        tau,
        mode: if ground_state {
            SelectionMode::GroundState
        } else {
            SelectionMode::Threshold
        },
    }
}

/// Inclusion frequencies over the lowest `quantile` of the multiplicity
/// weighted set. `frequencies` must hold [`hr_sampleset_num_vars`] values.
/// `selected`, when not null, receives 1 for each selected variable under
/// `tau` (or the ground-state support when `ground_state` is set) and 0 otherwise.
///
/// # Safety
/// `set` must be a live handle; `frequencies` must hold `len` doubles;
/// `selected` null or holding `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn hr_stability(
    set: *const HrSampleSet,
    quantile: f64,
    tau: f64,
    ground_state: bool,
    frequencies: *mut f64,
    selected: *mut u8,
    len: usize,
) -> HrStatus {
    guard(|| {
        non_null!(set, frequencies);
        let report = match analyze(&(*set).0, &stability_params(quantile, tau, ground_state)) {
            Ok(r) => r,
            Err(e) => return from_error(&e),
        };
        let n = report.frequencies.len();
        if len < n {
            return fail(
                HrStatus::BufferTooSmall,
                format!("buffers hold {len}, need {n}"),
            );
        }
        std::slice::from_raw_parts_mut(frequencies, n).copy_from_slice(&report.frequencies);
        if !selected.is_null() {
            let mask = std::slice::from_raw_parts_mut(selected, n);
            mask.fill(0);
            for &i in &report.selected {
                mask[i] = 1;
            }
        }
        HrStatus::Ok
    })
}

/// Full stability report as JSON. Free the result with [`hr_string_free`].
///
/// # Safety
/// `set` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hr_stability_report_json(
    set: *const HrSampleSet,
    quantile: f64,
    tau: f64,
    ground_state: bool,
    out: *mut *mut c_char,
) -> HrStatus {
    guard(|| {
        non_null!(set, out);
        let report = match analyze(&(*set).0, &stability_params(quantile, tau, ground_state)) {
            Ok(r) => r,
            Err(e) => return from_error(&e),
        };
        match serde_json::to_string(&report) {
            Ok(s) => into_c_string(s, out),
            Err(e) => fail(HrStatus::InvalidInput, e.to_string()),
        }
    })
}

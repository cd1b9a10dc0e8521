//! C ABI over the fockfilter simulator.
//!
//! Circuits and ensembles cross the boundary as opaque handles that the caller
//! releases with the matching `*_free` function. Every fallible call returns a
//! [`FfStatus`]; on failure a message for the current thread is available from
//! [`ff_last_error_message`] until the next failing call on that thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fockfilter::circuit::{build_filter_circuit, parse_circuit, serialize_circuit, Circuit, FilterSpec};
use fockfilter::detection::{DetectorModel, Ensemble};
use fockfilter::fock::{FockState, OccupationVector};
use fockfilter::scenarios::error_analysis;
use fockfilter::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Execution = 4,
    Panic = 5,
}

/// Opaque circuit handle.
pub struct FfCircuit(Circuit);

/// Opaque handle to a conditioned ensemble.
pub struct FfEnsemble(Ensemble);

/// Detector error budget; see `error_analysis` in the Rust crate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FfErrorReport {
    pub eta: f64,
    pub dark: f64,
    pub misread_2_as_1: f64,
    pub hv_error_rate: f64,
    pub ideal_success_prob: f64,
    pub false_transmission_prob: f64,
    pub lossy_acceptance: f64,
    pub mixture_entangled_fraction: f64,
    pub mixture_single_photon_fraction: f64,
    pub dark_counts_per_pulse: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).unwrap_or_default());
}

fn fail(status: FfStatus, message: impl AsRef<str>) -> FfStatus {
    set_error(message.as_ref());
    status
}

fn guard(f: impl FnOnce() -> FfStatus) -> FfStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(FfStatus::Panic, "internal panic"))
}

fn classify(e: &Error) -> FfStatus {
    match e {
        Error::Json(_) | Error::Element { .. } | Error::UseAfterDetect { .. } | Error::UnknownMode(_) => {
            FfStatus::Parse
        }
        Error::InvalidReflectivity(_)
        | Error::InvalidPhase(_)
        | Error::InvalidDetector(_)
        | Error::InvalidParameter(_)
        | Error::InvalidInput(_)
        | Error::LengthMismatch { .. } => FfStatus::InvalidArgument,
        _ => FfStatus::Execution,
    }
}

fn from_error(e: Error) -> FfStatus {
    fail(classify(&e), e.to_string())
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ff_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the two-photon polarization filter. With `lossy` false the detector
/// parameters are ignored and ideal detectors are used.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn ff_filter_circuit_new(
    attenuator_r: f64,
    lossy: bool,
    eta: f64,
    dark: f64,
    out: *mut *mut FfCircuit,
) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return fail(FfStatus::NullPointer, "out is null");
        }
        let detector = if lossy {
            match DetectorModel::lossy(eta, dark) {
                Ok(m) => m,
                Err(e) => return from_error(e),
            }
        } else {
            DetectorModel::ideal()
        };
        let spec = FilterSpec::default().with_attenuator(attenuator_r).with_detector(detector);
        match build_filter_circuit(&spec) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(FfCircuit(c)));
                FfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Parses a JSON circuit description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_circuit_parse_json(json: *const c_char, out: *mut *mut FfCircuit) -> FfStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(FfStatus::NullPointer, "json or out is null");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(FfStatus::Parse, "circuit text is not UTF-8");
        };
        match parse_circuit(text) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(FfCircuit(c)));
                FfStatus::Ok
            }
            Err(e) => fail(FfStatus::Parse, e.to_string()),
        }
    })
}

/// Serializes a circuit to JSON. Release the string with [`ff_string_free`].
///
/// # Safety
/// `circuit` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_circuit_to_json(circuit: *const FfCircuit, out: *mut *mut c_char) -> FfStatus {
    guard(|| {
        if circuit.is_null() || out.is_null() {
            return fail(FfStatus::NullPointer, "circuit or out is null");
        }
        match CString::new(serialize_circuit(&(*circuit).0)) {
            Ok(s) => {
                *out = s.into_raw();
                FfStatus::Ok
            }
            Err(_) => fail(FfStatus::Execution, "serialized circuit contains NUL"),
        }
    })
}

/// Number of modes in the circuit's registry, or 0 for a null handle.
///
/// # Safety
/// `circuit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_circuit_mode_count(circuit: *const FfCircuit) -> usize {
    if circuit.is_null() {
        return 0;
    }
    (*circuit).0.registry().len()
}

/// Writes the 4×4 conditional operator on (HH, HV, VH, VV), row-major with
/// rows indexing outputs, into `re[16]` and `im[16]`.
///
/// # Safety
/// `circuit` must be a live handle; `re` and `im` must each hold 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn ff_circuit_effective_operator(
    circuit: *const FfCircuit,
    re: *mut f64,
    im: *mut f64,
) -> FfStatus {
    guard(|| {
        if circuit.is_null() || re.is_null() || im.is_null() {
            return fail(FfStatus::NullPointer, "circuit, re or im is null");
        }
        let op = match (*circuit).0.effective_polarization_operator() {
            Ok(op) => op,
            Err(e) => return from_error(e),
        };
        let re = std::slice::from_raw_parts_mut(re, 16);
        let im = std::slice::from_raw_parts_mut(im, 16);
        for row in 0..4 {
            for col in 0..4 {
                let z = op.get(row, col);
                re[4 * row + col] = z.re;
                im[4 * row + col] = z.im;
            }
        }
        FfStatus::Ok
    })
}

/// Runs the circuit on the basis state with `counts[i]` photons in mode `i`.
/// `len` must equal the mode count.
///
/// # Safety
/// `circuit` must be a live handle, `counts` must hold `len` bytes and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_circuit_run_basis(
    circuit: *const FfCircuit,
    counts: *const u8,
    len: usize,
    out: *mut *mut FfEnsemble,
) -> FfStatus {
    guard(|| {
        if circuit.is_null() || out.is_null() || (counts.is_null() && len > 0) {
            return fail(FfStatus::NullPointer, "circuit, counts or out is null");
        }
        let c = &(*circuit).0;
        let occ = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(counts, len).to_vec()
        };
        let input = match FockState::basis(c.registry(), OccupationVector::new(occ)) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        match c.run(&Ensemble::pure(&input)) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(FfEnsemble(e)));
                FfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Total post-selection probability of an ensemble, or NaN for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_ensemble_acceptance(ensemble: *const FfEnsemble) -> f64 {
    if ensemble.is_null() {
        return f64::NAN;
    }
    (*ensemble).0.acceptance_probability()
}

/// Number of branches in an ensemble, or 0 for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_ensemble_branch_count(ensemble: *const FfEnsemble) -> usize {
    if ensemble.is_null() {
        return 0;
    }
    (*ensemble).0.branches().len()
}

/// Unnormalized amplitude of the basis term `counts` in a pure ensemble
/// (weight folded in). Fails with `Execution` on a mixed ensemble.
///
/// # Safety
/// `ensemble` must be a live handle, `counts` must hold `len` bytes and
/// `re`, `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_ensemble_amplitude(
    ensemble: *const FfEnsemble,
    counts: *const u8,
    len: usize,
    re: *mut f64,
    im: *mut f64,
) -> FfStatus {
    guard(|| {
        if ensemble.is_null() || re.is_null() || im.is_null() || (counts.is_null() && len > 0) {
            return fail(FfStatus::NullPointer, "null argument");
        }
        let e = &(*ensemble).0;
        if len != e.registry().len() {
            return fail(
                FfStatus::InvalidArgument,
                format!("expected {} counts, got {len}", e.registry().len()),
            );
        }
        let occ = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(counts, len).to_vec()
        };
        let amp = match e.branches() {
            [] => Default::default(),
            _ => match e.as_pure() {
                Some(s) => s.amplitude(&OccupationVector::new(occ)),
                None => return fail(FfStatus::Execution, "ensemble is mixed"),
            },
        };
        *re = amp.re;
        *im = amp.im;
        FfStatus::Ok
    })
}

/// Detector error budget of the filter.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_error_analysis(
    eta: f64,
    dark: f64,
    dark_rate_cps: f64,
    window_s: f64,
    out: *mut FfErrorReport,
) -> FfStatus {
    guard(|| {
        if out.is_null() {
            return fail(FfStatus::NullPointer, "out is null");
        }
        match error_analysis(eta, dark, dark_rate_cps, window_s) {
            Ok(r) => {
                *out = FfErrorReport {
                    eta: r.eta,
                    dark: r.dark,
                    misread_2_as_1: r.misread_2_as_1,
                    hv_error_rate: r.hv_error_rate,
                    ideal_success_prob: r.ideal_success_prob,
                    false_transmission_prob: r.false_transmission_prob,
                    lossy_acceptance: r.lossy_acceptance,
                    mixture_entangled_fraction: r.mixture_entangled_fraction,
                    mixture_single_photon_fraction: r.mixture_single_photon_fraction,
                    dark_counts_per_pulse: r.dark_counts_per_pulse,
                };
                FfStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `circuit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_circuit_free(circuit: *mut FfCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// # Safety
/// `ensemble` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_ensemble_free(ensemble: *mut FfEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

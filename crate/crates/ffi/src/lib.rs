//! C interface to `entscale`.
//!
//! Objects are opaque handles released with their `*_free` function. Every
//! call returns an [`EsStatus`]; on failure the message is available from
//! [`es_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use entscale::exactcover::ExactCoverInstance;
use entscale::num_complex::Complex64;
use entscale::solver::{sweep, SGrid, SolverOptions, SweepProfile};
use entscale::statevec::{self, BiPartition, StateVector};
use entscale::{grover, shor, Error, ErrorKind};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    InvalidArgument = 1,
    InvalidState = 2,
    ResourceLimit = 3,
    Convergence = 4,
    Io = 5,
    NullPointer = 6,
    Panic = 7,
}

/// A normalized state vector.
pub struct EsState(StateVector);

/// An Exact Cover instance with a unique satisfying assignment.
pub struct EsInstance(ExactCoverInstance);

/// The result of an `s` sweep.
pub struct EsProfile(SweepProfile);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EsSweepRecord {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub entropy: f64,
    pub h10: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EsGroverPoint {
    pub e_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub entropy: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> EsStatus {
    match err.kind() {
        ErrorKind::InvalidArgument => EsStatus::InvalidArgument,
        ErrorKind::InvalidState => EsStatus::InvalidState,
        ErrorKind::ResourceLimit => EsStatus::ResourceLimit,
        ErrorKind::Convergence => EsStatus::Convergence,
        ErrorKind::Io => EsStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> EsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EsStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            EsStatus::NullPointer
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            EsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument(format!("{what} is not UTF-8"))))
}

fn partition(n: usize, mask_a: u64) -> Result<BiPartition, Error> {
    if mask_a == 0 {
        BiPartition::half(n)
    } else {
        BiPartition::new(n, mask_a)
    }
}

/// Message for the last failed call on this thread, or NULL. Free with
/// [`es_string_free`].
#[no_mangle]
pub extern "C" fn es_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn es_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a state from `2^n_qubits` real and imaginary parts; the norm must be 1.
///
/// # Safety
/// `re` and `im` must each point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_state_new(
    n_qubits: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out_state: *mut *mut EsState,
) -> EsStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        if im.is_null() {
            return Err(Failure::Null("im"));
        }
        let re = std::slice::from_raw_parts(re, len);
        let im = std::slice::from_raw_parts(im, len);
        let amps = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
        let state = StateVector::new(n_qubits, amps)?;
        *slot = Box::into_raw(Box::new(EsState(state)));
        Ok(())
    })
}

/// # Safety
/// `state` must come from [`es_state_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn es_state_free(state: *mut EsState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Entropy in bits of subsystem `mask_a` (0 selects qubits `0..n/2`).
///
/// # Safety
/// `state` must be a live handle; `out_entropy` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_state_entropy(state: *const EsState, mask_a: u64, out_entropy: *mut f64) -> EsStatus {
    guard(|| {
        let st = &deref(state, "state")?.0;
        let slot = out(out_entropy, "out_entropy")?;
        *slot = statevec::entropy(st, &partition(st.n_qubits(), mask_a)?)?;
        Ok(())
    })
}

/// # Safety
/// `state` must be a live handle; `out_rank` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_state_schmidt_rank(
    state: *const EsState,
    mask_a: u64,
    tol: f64,
    out_rank: *mut usize,
) -> EsStatus {
    guard(|| {
        let st = &deref(state, "state")?.0;
        let slot = out(out_rank, "out_rank")?;
        *slot = statevec::schmidt_rank(st, &partition(st.n_qubits(), mask_a)?, tol)?;
        Ok(())
    })
}

/// # Safety
/// `out_instance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_instance_generate(
    n_qubits: usize,
    arity: usize,
    seed: u64,
    out_instance: *mut *mut EsInstance,
) -> EsStatus {
    guard(|| {
        let slot = out(out_instance, "out_instance")?;
        let inst = entscale::generate_instance(n_qubits, arity, seed)?;
        *slot = Box::into_raw(Box::new(EsInstance(inst)));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out_instance` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_instance_from_json(json: *const c_char, out_instance: *mut *mut EsInstance) -> EsStatus {
    guard(|| {
        let json = text(json, "json")?;
        let slot = out(out_instance, "out_instance")?;
        *slot = Box::into_raw(Box::new(EsInstance(ExactCoverInstance::from_json(json)?)));
        Ok(())
    })
}

/// Serialized instance; free the string with [`es_string_free`].
///
/// # Safety
/// `instance` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_instance_to_json(instance: *const EsInstance, out_json: *mut *mut c_char) -> EsStatus {
    guard(|| {
        let inst = &deref(instance, "instance")?.0;
        let slot = out(out_json, "out_json")?;
        *slot = CString::new(inst.to_json()).unwrap_or_default().into_raw();
        Ok(())
    })
}

/// # Safety
/// `instance` must be a live handle; `out_n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_instance_n_qubits(instance: *const EsInstance, out_n: *mut usize) -> EsStatus {
    guard(|| {
        *out(out_n, "out_n")? = deref(instance, "instance")?.0.n_qubits();
        Ok(())
    })
}

/// # Safety
/// `instance` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn es_instance_free(instance: *mut EsInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Sweeps `s` over `[0, 1]` with spacing `step`; `mask_a` 0 selects qubits `0..n/2`.
///
/// # Safety
/// `instance` must be a live handle; `out_profile` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_sweep(
    instance: *const EsInstance,
    step: f64,
    mask_a: u64,
    seed: u64,
    out_profile: *mut *mut EsProfile,
) -> EsStatus {
    guard(|| {
        let inst = &deref(instance, "instance")?.0;
        let slot = out(out_profile, "out_profile")?;
        let grid = SGrid::uniform(step)?;
        let part = partition(inst.n_qubits(), mask_a)?;
        let opts = SolverOptions {
            seed,
            ..SolverOptions::default()
        };
        *slot = Box::into_raw(Box::new(EsProfile(sweep(inst, &grid, &part, &opts)?)));
        Ok(())
    })
}

/// # Safety
/// `profile` must be a live handle; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_profile_len(profile: *const EsProfile, out_len: *mut usize) -> EsStatus {
    guard(|| {
        *out(out_len, "out_len")? = deref(profile, "profile")?.0.records.len();
        Ok(())
    })
}

/// # Safety
/// `profile` must be a live handle; `out_record` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_profile_record(
    profile: *const EsProfile,
    index: usize,
    out_record: *mut EsSweepRecord,
) -> EsStatus {
    guard(|| {
        let p = &deref(profile, "profile")?.0;
        let slot = out(out_record, "out_record")?;
        let r = p.records.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!("record {index} out of range ({} records)", p.records.len()))
        })?;
        *slot = EsSweepRecord {
            s: r.s,
            e0: r.e0,
            e1: r.e1,
            gap: r.gap,
            entropy: r.entropy_bits,
            h10: r.h10_abs,
        };
        Ok(())
    })
}

/// On-grid locations of the minimum gap and the maximum entropy.
///
/// # Safety
/// `profile` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_profile_critical_points(
    profile: *const EsProfile,
    out_s_min_gap: *mut f64,
    out_s_max_entropy: *mut f64,
) -> EsStatus {
    guard(|| {
        let p = &deref(profile, "profile")?.0;
        *out(out_s_min_gap, "out_s_min_gap")? = p.s_min_gap;
        *out(out_s_max_entropy, "out_s_max_entropy")? = p.s_max_entropy;
        Ok(())
    })
}

/// # Safety
/// `profile` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn es_profile_free(profile: *mut EsProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Two-level Grover ground state at `(n, s)`, `n` even.
///
/// # Safety
/// `out_point` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_grover_point(n_qubits: usize, s: f64, out_point: *mut EsGroverPoint) -> EsStatus {
    guard(|| {
        let slot = out(out_point, "out_point")?;
        let p = grover::point(n_qubits, s)?;
        *slot = EsGroverPoint {
            e_minus: p.e_minus,
            lambda_plus: p.lambda_plus,
            lambda_minus: p.lambda_minus,
            entropy: p.entropy_bits,
        };
        Ok(())
    })
}

/// Multiplicative order of `a` modulo `modulus`.
///
/// # Safety
/// `out_order` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_shor_order(a: u64, modulus: u64, out_order: *mut u64) -> EsStatus {
    guard(|| {
        let slot = out(out_order, "out_order")?;
        *slot = shor::order(a, modulus)?;
        Ok(())
    })
}

/// Entropy and Schmidt rank of the target register in the pre-QFT state.
///
/// # Safety
/// Both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_shor_target_entanglement(
    modulus: u64,
    a: u64,
    out_entropy: *mut f64,
    out_rank: *mut usize,
) -> EsStatus {
    guard(|| {
        let entropy = out(out_entropy, "out_entropy")?;
        let rank = out(out_rank, "out_rank")?;
        let rep = shor::target_spectrum(&shor::ShorCase::new(modulus, a)?)?;
        *entropy = rep.entropy_bits;
        *rank = rep.schmidt_rank;
        Ok(())
    })
}

//! C interface to the bounds, the kl inverse and the online policies.
//!
//! Every function returns a [`BlStatus`] and writes results through out
//! pointers. On failure the message is kept per thread and can be fetched
//! with [`bl_last_error_message`].

use boundlab::concentration::{
    empirical_bernstein_mean_bound, hoeffding_radius, kl_mean_bound, split_kl_mean_bound,
    unexpected_bernstein_mean_bound, KlVariant, LambdaGrid, Sample, Sides, SplitGrid,
};
use boundlab::divergences::{binary_kl, kl_inverse, Direction, ProbVec};
use boundlab::environments::parse_log_line;
use boundlab::online_policies::{Exp3, Exp3Variant, Feedback, Hedge, Policy, Ucb1, UcbParam};
use boundlab::pac_bayes::{pb_kl_bound, PacBayesQuery};
use boundlab::rng::{rng_from, SimRng};
use boundlab::Error;
use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    Domain = 1,
    LengthMismatch = 2,
    Parse = 3,
    NullPointer = 4,
    Io = 5,
    Config = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> BlStatus {
    match e {
        Error::Domain(_) => BlStatus::Domain,
        Error::LengthMismatch { .. } => BlStatus::LengthMismatch,
        Error::Parse { .. } => BlStatus::Parse,
        Error::Config { .. } => BlStatus::Config,
        Error::Io(_) => BlStatus::Io,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BlStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            BlStatus::NullPointer
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            BlStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copy of the last error message on this thread, or NULL if none.
/// Release it with [`bl_string_free`].
#[no_mangle]
pub extern "C" fn bl_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(m) => CString::new(m.replace('\0', " ")).map_or(std::ptr::null_mut(), CString::into_raw),
        None => std::ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be NULL or a pointer returned by this library that has not been
/// freed yet.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// kl(p‖q) in nats.
///
/// # Safety
/// `out_value` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn bl_binary_kl(p: f64, q: f64, out_value: *mut f64) -> BlStatus {
    guard(|| {
        *out(out_value, "out_value")? = binary_kl(p, q)?;
        Ok(())
    })
}

/// Upper (upper != 0) or lower kl inverse of `p_hat` at level `eps`.
///
/// # Safety
/// `out_value` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn bl_kl_inverse(p_hat: f64, eps: f64, upper: c_int, out_value: *mut f64) -> BlStatus {
    guard(|| {
        let dir = if upper != 0 { Direction::Upper } else { Direction::Lower };
        *out(out_value, "out_value")? = kl_inverse(p_hat, eps, dir)?;
        Ok(())
    })
}

/// Hoeffding radius for n samples in [0, 1].
///
/// # Safety
/// `out_value` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn bl_hoeffding_radius(n: u64, delta: f64, two_sided: c_int, out_value: *mut f64) -> BlStatus {
    guard(|| {
        let sides = if two_sided != 0 { Sides::Two } else { Sides::One };
        *out(out_value, "out_value")? = hoeffding_radius(n, delta, sides)?;
        Ok(())
    })
}

/// kl bound on the mean; `via_lemma` selects the ln(2√n/δ) budget and
/// `upper` the direction.
///
/// # Safety
/// `out_value` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn bl_kl_mean_bound(
    p_hat: f64,
    n: u64,
    delta: f64,
    via_lemma: c_int,
    upper: c_int,
    out_value: *mut f64,
) -> BlStatus {
    guard(|| {
        let v = if via_lemma != 0 { KlVariant::ViaLemma } else { KlVariant::Direct };
        let d = if upper != 0 { Direction::Upper } else { Direction::Lower };
        *out(out_value, "out_value")? = kl_mean_bound(p_hat, n, delta, v, d)?.value;
        Ok(())
    })
}

/// Empirical Bernstein upper bound for a [0, 1]-valued sample.
///
/// # Safety
/// `values` must point to `len` doubles and `out_value` to a double.
#[no_mangle]
pub unsafe extern "C" fn bl_empirical_bernstein(
    values: *const f64,
    len: usize,
    delta: f64,
    out_value: *mut f64,
) -> BlStatus {
    guard(|| {
        let s = Sample::unit(slice(values, len, "values")?.to_vec())?;
        *out(out_value, "out_value")? = empirical_bernstein_mean_bound(&s, delta)?.value;
        Ok(())
    })
}

/// Split-kl upper bound with segment points `grid` (strictly increasing,
/// covering the sample).
///
/// # Safety
/// `values` must point to `len` doubles, `grid` to `grid_len` doubles and
/// `out_value` to a double.
#[no_mangle]
pub unsafe extern "C" fn bl_split_kl(
    values: *const f64,
    len: usize,
    grid: *const f64,
    grid_len: usize,
    delta: f64,
    out_value: *mut f64,
) -> BlStatus {
    guard(|| {
        let g = SplitGrid::new(slice(grid, grid_len, "grid")?.to_vec())?;
        let b = g.points();
        let s = Sample::bounded(slice(values, len, "values")?.to_vec(), Some(b[0]), b[b.len() - 1])?;
        *out(out_value, "out_value")? = split_kl_mean_bound(&s, &g, delta)?.value;
        Ok(())
    })
}

/// Unexpected Bernstein upper bound for a sample bounded above by `b`, with
/// the default λ grid.
///
/// # Safety
/// `values` must point to `len` doubles and `out_value` to a double.
#[no_mangle]
pub unsafe extern "C" fn bl_unexpected_bernstein(
    values: *const f64,
    len: usize,
    b: f64,
    delta: f64,
    out_value: *mut f64,
) -> BlStatus {
    guard(|| {
        let v = slice(values, len, "values")?.to_vec();
        let lower = v.iter().all(|x| *x >= 0.0).then_some(0.0);
        let s = Sample::bounded(v, lower, b)?;
        let grid = LambdaGrid::default_for(len as u64, delta, b)?;
        *out(out_value, "out_value")? = unexpected_bernstein_mean_bound(&s, delta, &grid)?.value;
        Ok(())
    })
}

/// PAC-Bayes-kl bound for posterior `rho` and prior `pi` over `m`
/// hypotheses, empirical Gibbs loss `emp_loss` on `n` samples.
///
/// # Safety
/// `rho` and `pi` must point to `m` doubles and `out_value` to a double.
#[no_mangle]
pub unsafe extern "C" fn bl_pb_kl_bound(
    rho: *const f64,
    pi: *const f64,
    m: usize,
    n: usize,
    emp_loss: f64,
    delta: f64,
    out_value: *mut f64,
) -> BlStatus {
    guard(|| {
        let rho = ProbVec::new(slice(rho, m, "rho")?.to_vec())?;
        let pi = ProbVec::new(slice(pi, m, "pi")?.to_vec())?;
        let q = PacBayesQuery::new(rho, pi, n, delta)?;
        *out(out_value, "out_value")? = pb_kl_bound(&q, emp_loss)?.value;
        Ok(())
    })
}

/// Parses one log record. `features` receives 10 bytes.
///
/// # Safety
/// `line` must be a NUL-terminated string; the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_parse_log_line(
    line: *const c_char,
    k: usize,
    action: *mut usize,
    reward: *mut u8,
    features: *mut u8,
) -> BlStatus {
    guard(|| {
        if line.is_null() {
            return Err(Fail::Null("line"));
        }
        let text =
            CStr::from_ptr(line).to_str().map_err(|_| Error::Parse { line: 0, msg: "line is not UTF-8".into() })?;
        let rec = parse_log_line(text, k)?;
        let (a, r) = (out(action, "action")?, out(reward, "reward")?);
        if features.is_null() {
            return Err(Fail::Null("features"));
        }
        *a = rec.action;
        *r = rec.reward;
        std::ptr::copy_nonoverlapping(rec.features.as_ptr(), features, 10);
        Ok(())
    })
}

/// Opaque policy handle.
pub struct BlPolicy {
    inner: Box<dyn Policy>,
    rng: SimRng,
    t: usize,
    pending: Option<usize>,
}

unsafe fn new_policy(p: Box<dyn Policy>, seed: u64, handle: *mut *mut BlPolicy) -> Result<(), Fail> {
    let h = out(handle, "handle")?;
    *h = Box::into_raw(Box::new(BlPolicy { inner: p, rng: rng_from(seed), t: 0, pending: None }));
    Ok(())
}

/// UCB1 on K arms; `improved != 0` selects the improved parametrization.
///
/// # Safety
/// `handle` must be a valid pointer; free the result with [`bl_policy_free`].
#[no_mangle]
pub unsafe extern "C" fn bl_policy_new_ucb1(
    k: usize,
    improved: c_int,
    seed: u64,
    handle: *mut *mut BlPolicy,
) -> BlStatus {
    guard(|| {
        let param = if improved != 0 { UcbParam::Improved } else { UcbParam::Original };
        new_policy(Box::new(Ucb1::new(k, param)?), seed, handle)
    })
}

/// EXP3 on losses with the anytime rate.
///
/// # Safety
/// `handle` must be a valid pointer; free the result with [`bl_policy_free`].
#[no_mangle]
pub unsafe extern "C" fn bl_policy_new_exp3(k: usize, seed: u64, handle: *mut *mut BlPolicy) -> BlStatus {
    guard(|| new_policy(Box::new(Exp3::anytime(k, Exp3Variant::Losses)?), seed, handle))
}

/// Anytime Hedge with η_t = 2√(ln K / t); needs full-information feedback.
///
/// # Safety
/// `handle` must be a valid pointer; free the result with [`bl_policy_free`].
#[no_mangle]
pub unsafe extern "C" fn bl_policy_new_hedge(k: usize, seed: u64, handle: *mut *mut BlPolicy) -> BlStatus {
    guard(|| new_policy(Box::new(Hedge::anytime(k, 2.0)?), seed, handle))
}

/// Picks the arm for the next round. Calling it again before an observe
/// call returns the same arm.
///
/// # Safety
/// `policy` must come from a `bl_policy_new_*` call; `arm` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_policy_select(policy: *mut BlPolicy, arm: *mut usize) -> BlStatus {
    guard(|| {
        let p = out(policy, "policy")?;
        let a = out(arm, "arm")?;
        if p.pending.is_none() {
            p.t += 1;
            p.pending = Some(p.inner.decide(p.t, None, &mut p.rng)?.arm);
        }
        *a = p.pending.expect("set above");
        Ok(())
    })
}

unsafe fn observe(policy: *mut BlPolicy, fb: Feedback) -> Result<(), Fail> {
    let p = out(policy, "policy")?;
    let Some(chosen) = p.pending else {
        return Err(Error::Domain("observe called before select".into()).into());
    };
    if let Feedback::Bandit { arm, .. } = fb {
        if arm != chosen {
            return Err(Error::Domain(format!("observed arm {arm} but the policy chose {chosen}")).into());
        }
    }
    p.inner.update(&fb)?;
    p.pending = None;
    Ok(())
}

/// Reports the loss of the selected arm.
///
/// # Safety
/// `policy` must come from a `bl_policy_new_*` call.
#[no_mangle]
pub unsafe extern "C" fn bl_policy_observe_bandit(policy: *mut BlPolicy, arm: usize, loss: f64) -> BlStatus {
    guard(|| observe(policy, Feedback::Bandit { arm, loss }))
}

/// Reports the whole loss vector of the round.
///
/// # Safety
/// `policy` must come from a `bl_policy_new_*` call and `losses` must point
/// to `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn bl_policy_observe_full(policy: *mut BlPolicy, losses: *const f64, k: usize) -> BlStatus {
    guard(|| {
        let col = slice(losses, k, "losses")?.to_vec();
        observe(policy, Feedback::Full(col))
    })
}

/// # Safety
/// `policy` must be NULL or come from a `bl_policy_new_*` call, and must not
/// be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_policy_free(policy: *mut BlPolicy) {
    if !policy.is_null() {
        drop(Box::from_raw(policy));
    }
}

//! C ABI over the planning and simulation library.
//!
//! Objects are opaque handles created by `hp_*_parse`/`hp_*_build` and
//! released with the matching `hp_*_free`. Every fallible call returns an
//! [`HpStatus`]; on failure [`hp_last_error_message`] describes the error.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hybridplan::pipeline::Plan;
use hybridplan::planner::PolicyCheck;
use hybridplan::runtime::{Runtime, Start};
use hybridplan::scenario::{PrimitiveMode, Scenario};
use hybridplan::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Semantic = 4,
    UnreachableGoal = 5,
    PolicyMismatch = 6,
    PolicyFormat = 7,
    NumericFailure = 8,
    Stuck = 9,
    InvalidArgument = 10,
    Io = 11,
    Internal = 12,
}

impl From<&Error> for HpStatus {
    fn from(e: &Error) -> HpStatus {
        match e {
            Error::Syntax { .. } => HpStatus::Syntax,
            Error::Semantic(_) | Error::EmptyWorkspace => HpStatus::Semantic,
            Error::UnreachableGoal(_) => HpStatus::UnreachableGoal,
            Error::PolicyMismatch { .. } => HpStatus::PolicyMismatch,
            Error::PolicyFormat(_) => HpStatus::PolicyFormat,
            Error::NumericFailure { .. } => HpStatus::NumericFailure,
            Error::Stuck { .. } => HpStatus::Stuck,
            Error::Io(_) => HpStatus::Io,
            Error::OutOfWorkspace { .. }
            | Error::ContractViolation(_)
            | Error::NonPositiveEdgeCost(_)
            | Error::InvalidArgument(_) => HpStatus::InvalidArgument,
        }
    }
}

/// Opaque parsed scenario.
pub struct HpScenario(Scenario);

/// Opaque solved plan.
pub struct HpPlan(Plan);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HpPlanStats {
    pub locations: u64,
    pub primitives: u64,
    pub pa_states: u64,
    pub pa_edges: u64,
    pub admissible: u64,
    pub finals: u64,
    /// Offline wall-clock time in seconds.
    pub t_total: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HpRunSummary {
    /// 0 reached, 2 not reached, 3 safety violation, 4 numeric failure or stuck.
    pub exit_code: i32,
    pub reached: bool,
    /// NaN when the goal was not reached.
    pub t_reach: f64,
    pub t_end: f64,
    pub transitions: u64,
    pub recoveries: u64,
    pub violations: u64,
}

/// Primitive mode argument: keep the scenario's setting.
pub const HP_MODE_SCENARIO: i32 = -1;
pub const HP_MODE_ND: i32 = 0;
pub const HP_MODE_D: i32 = 1;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("no interior nul"));
}

fn guard(f: impl FnOnce() -> Result<(), HpStatus>) -> HpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            HpStatus::Internal
        }
    }
}

fn fail(e: Error) -> HpStatus {
    set_error(e.to_string());
    HpStatus::from(&e)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, HpStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(HpStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        HpStatus::InvalidUtf8
    })
}

unsafe fn nonnull<'a, T>(p: *const T) -> Result<&'a T, HpStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle");
        HpStatus::NullArgument
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_scenario_parse(json: *const c_char, out: *mut *mut HpScenario) -> HpStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer");
            return Err(HpStatus::NullArgument);
        }
        let s = Scenario::parse(text(json)?).map_err(fail)?;
        *out = Box::into_raw(Box::new(HpScenario(s)));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from `hp_scenario_parse` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hp_scenario_free(scenario: *mut HpScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Solves a scenario. `mode` is one of the `HP_MODE_*` constants.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_plan_build(
    scenario: *const HpScenario,
    mode: i32,
    out: *mut *mut HpPlan,
) -> HpStatus {
    guard(|| {
        let s = nonnull(scenario)?;
        if out.is_null() {
            set_error("null output pointer");
            return Err(HpStatus::NullArgument);
        }
        let mode = match mode {
            HP_MODE_SCENARIO => None,
            HP_MODE_ND => Some(PrimitiveMode::ND),
            HP_MODE_D => Some(PrimitiveMode::D),
            other => {
                set_error(format!("unknown primitive mode {other}"));
                return Err(HpStatus::InvalidArgument);
            }
        };
        let plan = Plan::build(s.0.clone(), mode).map_err(fail)?;
        *out = Box::into_raw(Box::new(HpPlan(plan)));
        Ok(())
    })
}

/// Reads a policy file produced for `scenario`.
///
/// # Safety
/// `scenario` must be a live handle, `policy_json` NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn hp_plan_load(
    scenario: *const HpScenario,
    policy_json: *const c_char,
    out: *mut *mut HpPlan,
) -> HpStatus {
    guard(|| {
        let s = nonnull(scenario)?;
        let policy = text(policy_json)?;
        if out.is_null() {
            set_error("null output pointer");
            return Err(HpStatus::NullArgument);
        }
        let plan = Plan::load(s.0.clone(), policy).map_err(fail)?;
        *out = Box::into_raw(Box::new(HpPlan(plan)));
        Ok(())
    })
}

/// # Safety
/// `plan` must come from `hp_plan_build`/`hp_plan_load` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hp_plan_free(plan: *mut HpPlan) {
    if !plan.is_null() {
        drop(Box::from_raw(plan));
    }
}

/// # Safety
/// `plan` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_plan_stats(plan: *const HpPlan, out: *mut HpPlanStats) -> HpStatus {
    guard(|| {
        let p = &nonnull(plan)?.0;
        if out.is_null() {
            set_error("null output pointer");
            return Err(HpStatus::NullArgument);
        }
        let st = p.pa.stats();
        *out = HpPlanStats {
            locations: p.ots.location_count() as u64,
            primitives: p.ma.primitive_count() as u64,
            pa_states: st.states as u64,
            pa_edges: st.edges as u64,
            admissible: st.admissible as u64,
            finals: st.finals as u64,
            t_total: p.timings.total(),
        };
        Ok(())
    })
}

/// Serializes the policy. Release the string with `hp_string_free`.
///
/// # Safety
/// `plan` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_plan_policy_json(plan: *const HpPlan, out: *mut *mut c_char) -> HpStatus {
    guard(|| {
        let p = &nonnull(plan)?.0;
        if out.is_null() {
            set_error("null output pointer");
            return Err(HpStatus::NullArgument);
        }
        *out = CString::new(p.policy_json())
            .expect("json has no nul")
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Model-checks the policy; `certified` receives the verdict.
///
/// # Safety
/// `plan` must be a live handle and `certified` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hp_plan_check(plan: *const HpPlan, certified: *mut bool) -> HpStatus {
    guard(|| {
        let p = &nonnull(plan)?.0;
        if certified.is_null() {
            set_error("null output pointer");
            return Err(HpStatus::NullArgument);
        }
        *certified = matches!(p.check(), PolicyCheck::Certified(_));
        Ok(())
    })
}

/// Simulates one run from positions `y` and velocities `v` (each `len`
/// long; `v` may be null for rest). `t_max <= 0` selects the default horizon.
///
/// # Safety
/// `plan` must be a live handle, `y` (and `v` if non-null) must point to
/// `len` doubles, and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hp_simulate(
    plan: *const HpPlan,
    y: *const f64,
    v: *const f64,
    len: usize,
    t_max: f64,
    out: *mut HpRunSummary,
) -> HpStatus {
    guard(|| {
        let p = &nonnull(plan)?.0;
        if y.is_null() || out.is_null() {
            set_error("null argument");
            return Err(HpStatus::NullArgument);
        }
        let y = std::slice::from_raw_parts(y, len).to_vec();
        let v = if v.is_null() {
            vec![0.0; len]
        } else {
            std::slice::from_raw_parts(v, len).to_vec()
        };
        let rt = Runtime::new(p, &[]).map_err(fail)?;
        let start = Start {
            y,
            v,
            primitive: None,
        };
        let log = rt.run(&start, (t_max > 0.0).then_some(t_max)).map_err(fail)?;
        let s = &log.summary;
        *out = HpRunSummary {
            exit_code: s.outcome.exit_code(),
            reached: s.reached,
            t_reach: s.t_reach.unwrap_or(f64::NAN),
            t_end: s.t_end,
            transitions: s.transitions as u64,
            recoveries: s.recoveries as u64,
            violations: s.violations.len() as u64,
        };
        Ok(())
    })
}

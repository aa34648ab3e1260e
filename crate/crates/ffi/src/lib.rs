//! C ABI for `bell-lab`.
//!
//! Conventions:
//! - every fallible function returns a [`BlStatus`] and writes results
//!   through out-pointers;
//! - objects are opaque handles created by `bl_*_new`/generator functions
//!   and released with the matching `bl_*_free`;
//! - after a non-OK status, [`bl_last_error`] describes the failure on the
//!   calling thread;
//! - strings returned to the caller are released with [`bl_string_free`].
//!
//! Panics never cross the boundary; they surface as `BL_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bell_lab::bellgame::{play_game, SettingSource, Strategy};
use bell_lab::estimators::{eberhard_counts, eberhard_j, EberhardMapping};
use bell_lab::randi::{gill_campaign, gill_subsample, vongher_campaign, CampaignReport, GillGenerator, VongherSource};
use bell_lab::sources::{generate_cfd_spreadsheet, sample_singlet_pair, singlet_correlation, Spreadsheet4};
use bell_lab::stats::{chebyshev_confidence, homogeneity_test, sem, BinnedSample, HomogeneityInput, HomogeneityMethod};
use bell_lab::{Angle, Error, Outcome, PairedTrial, SeededRng, Setting};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The statistic is undefined for this input (for example an empty
    /// setting combination).
    Undefined = 3,
    Panic = 4,
}

/// Instruction-set generator for the coin-toss challenge.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlGenerator {
    Uniform = 0,
    Constant = 1,
    Boundary = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlHomogeneityMethod {
    ChiSquareSplits = 0,
    TwoSampleKs = 1,
    RunsTest = 2,
}

/// One paired trial; outcomes are -1, 0 (no count) or +1.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlTrial {
    pub setting_a: u8,
    pub setting_b: u8,
    pub a: i8,
    pub b: i8,
}

pub struct BlRng {
    inner: SeededRng,
}

pub struct BlSpreadsheet {
    inner: Spreadsheet4,
}

pub struct BlCampaign {
    inner: CampaignReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

fn fail(status: BlStatus, msg: impl Into<String>) -> BlStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> BlStatus {
    let status = match e {
        Error::InsufficientData(_) => BlStatus::Undefined,
        _ => BlStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

/// Runs `f`, mapping panics to `BL_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> BlStatus) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(BlStatus::Panic, msg)
        }
    }
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(BlStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

unsafe fn c_str<'a>(p: *const c_char) -> Result<&'a str, BlStatus> {
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BlStatus::InvalidArgument, "string is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message for the last failure on this thread, or null. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    static V: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    V.as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Creates a generator for `(seed, stream)`. Never returns null.
#[no_mangle]
pub extern "C" fn bl_rng_new(seed: u64, stream: u64) -> *mut BlRng {
    Box::into_raw(Box::new(BlRng {
        inner: SeededRng::new(seed, stream),
    }))
}

/// # Safety
/// `rng` must come from [`bl_rng_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bl_rng_free(rng: *mut BlRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// `−cos(θa − θb)`.
#[no_mangle]
pub extern "C" fn bl_singlet_correlation(theta_a: f64, theta_b: f64) -> f64 {
    singlet_correlation(Angle::new(theta_a), Angle::new(theta_b))
}

/// Draws one singlet pair into `out_a`, `out_b` (±1).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_singlet_sample(rng: *mut BlRng, theta_a: f64, theta_b: f64, out_a: *mut i8, out_b: *mut i8) -> BlStatus {
    non_null!(rng, out_a, out_b);
    guard(|| {
        if !(theta_a.is_finite() && theta_b.is_finite()) {
            return fail(BlStatus::InvalidArgument, "angles must be finite");
        }
        let (a, b) = sample_singlet_pair(Angle::new(theta_a), Angle::new(theta_b), &mut (*rng).inner);
        *out_a = a.value();
        *out_b = b.value();
        BlStatus::Ok
    })
}

fn generator(g: BlGenerator) -> GillGenerator {
    match g {
        BlGenerator::Uniform => GillGenerator::Uniform,
        BlGenerator::Constant => GillGenerator::Constant,
        BlGenerator::Boundary => GillGenerator::Boundary,
    }
}

/// Generates an `n_rows × 4` instruction-set spreadsheet.
///
/// # Safety
/// `rng` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_spreadsheet_generate(n_rows: usize, gen: BlGenerator, rng: *mut BlRng, out: *mut *mut BlSpreadsheet) -> BlStatus {
    non_null!(rng, out);
    guard(|| match generate_cfd_spreadsheet(n_rows, &generator(gen).distribution(), &mut (*rng).inner) {
        Ok(sheet) => {
            *out = Box::into_raw(Box::new(BlSpreadsheet { inner: sheet }));
            BlStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// # Safety
/// `sheet` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bl_spreadsheet_len(sheet: *const BlSpreadsheet) -> usize {
    if sheet.is_null() {
        0
    } else {
        (*sheet).inner.len()
    }
}

/// # Safety
/// `sheet` must come from [`bl_spreadsheet_generate`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bl_spreadsheet_free(sheet: *mut BlSpreadsheet) {
    if !sheet.is_null() {
        drop(Box::from_raw(sheet));
    }
}

/// One coin-toss subsample of `sheet`; writes the CHSH value.
/// Returns `BL_STATUS_UNDEFINED` when a setting combination drew no rows.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_gill_subsample(sheet: *const BlSpreadsheet, rng: *mut BlRng, out_s: *mut f64) -> BlStatus {
    non_null!(sheet, rng, out_s);
    guard(|| match gill_subsample(&(*sheet).inner, &mut (*rng).inner) {
        Ok(est) => match est.s_value {
            Some(s) => {
                *out_s = s;
                BlStatus::Ok
            }
            None => fail(BlStatus::Undefined, "a setting combination has no rows"),
        },
        Err(e) => from_error(e),
    })
}

/// Runs the coin-toss challenge campaign.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_gill_campaign(gen: BlGenerator, sheet_size: usize, runs: usize, seed: u64, out: *mut *mut BlCampaign) -> BlStatus {
    non_null!(out);
    guard(|| match gill_campaign(&generator(gen).distribution(), sheet_size, runs, seed) {
        Ok(r) => {
            *out = Box::into_raw(Box::new(BlCampaign { inner: r }));
            BlStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// Runs the tennis-ball campaign. `variant` is `strict`,
/// `missing_pairs[:p]`, `partial_anticorr[:q]` or `quantum`.
///
/// # Safety
/// `variant` must be a NUL-terminated string and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn bl_vongher_campaign(variant: *const c_char, n_pairs: usize, runs: usize, seed: u64, out: *mut *mut BlCampaign) -> BlStatus {
    non_null!(variant, out);
    guard(|| {
        let source: VongherSource = match c_str(variant).map(str::parse) {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => return from_error(e),
            Err(s) => return s,
        };
        match vongher_campaign(&source, n_pairs, runs, seed) {
            Ok(r) => {
                *out = Box::into_raw(Box::new(BlCampaign { inner: r }));
                BlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Fraction of runs violating CHSH.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_campaign_chsh_rate(c: *const BlCampaign, out: *mut f64) -> BlStatus {
    non_null!(c, out);
    *out = (*c).inner.chsh_violation_rate;
    BlStatus::Ok
}

/// Fraction of runs violating the counter inequality;
/// `BL_STATUS_UNDEFINED` for campaigns that do not test it.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_campaign_bell_rate(c: *const BlCampaign, out: *mut f64) -> BlStatus {
    non_null!(c, out);
    match (*c).inner.bell_violation_rate {
        Some(r) => {
            *out = r;
            BlStatus::Ok
        }
        None => fail(BlStatus::Undefined, "campaign has no counter inequality"),
    }
}

/// # Safety
/// `c` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bl_campaign_runs(c: *const BlCampaign) -> u64 {
    if c.is_null() {
        0
    } else {
        (*c).inner.runs
    }
}

/// The full report as JSON. Free with [`bl_string_free`]; null on failure.
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_campaign_to_json(c: *const BlCampaign) -> *mut c_char {
    if c.is_null() {
        set_error("c is null");
        return ptr::null_mut();
    }
    match serde_json_string(&(*c).inner) {
        Some(s) => into_c_string(s),
        None => ptr::null_mut(),
    }
}

fn serde_json_string(r: &CampaignReport) -> Option<String> {
    match serde_json::to_string(r) {
        Ok(s) => Some(s),
        Err(e) => {
            set_error(e.to_string());
            None
        }
    }
}

/// # Safety
/// `c` must come from a campaign function and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn bl_campaign_free(c: *mut BlCampaign) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Plays `rounds` of the Bell game with uniform settings and writes
/// `4 × points / rounds`. `strategy` is `random`, `quantum`, `contextual`
/// or `fixed:i,j`.
///
/// # Safety
/// `strategy` must be a NUL-terminated string and `out_avg_score` valid.
#[no_mangle]
pub unsafe extern "C" fn bl_bellgame_play(strategy: *const c_char, rounds: u64, seed: u64, out_avg_score: *mut f64) -> BlStatus {
    non_null!(strategy, out_avg_score);
    guard(|| {
        let s: Strategy = match c_str(strategy).map(str::parse) {
            Ok(Ok(s)) => s,
            Ok(Err(e)) => return from_error(e),
            Err(st) => return st,
        };
        match play_game(&s, rounds, &mut SeededRng::new(seed, 0), SettingSource::Uniform) {
            Ok(r) => {
                *out_avg_score = r.avg_score;
                BlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

unsafe fn slice<'a, T>(p: *const T, n: usize) -> &'a [T] {
    if n == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(p, n)
    }
}

/// Mean and standard error of `n` bin values.
///
/// # Safety
/// `values` must point to `n` doubles; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_sem(values: *const f64, n: usize, out_mean: *mut f64, out_sem: *mut f64) -> BlStatus {
    non_null!(values, out_mean, out_sem);
    guard(|| match BinnedSample::new(slice(values, n).to_vec()) {
        Ok(s) => {
            let m = sem(&s);
            *out_mean = m.mean;
            *out_sem = m.sem;
            BlStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// Chebyshev confidence for rejecting `null_bound`. `out_certain` is set
/// when `sem = 0` and the mean is off the bound.
///
/// # Safety
/// Out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_chebyshev_confidence(mean: f64, sem: f64, null_bound: f64, out_level: *mut f64, out_certain: *mut bool) -> BlStatus {
    non_null!(out_level, out_certain);
    guard(|| match chebyshev_confidence(mean, sem, null_bound) {
        Ok(c) => {
            *out_level = c.level;
            *out_certain = c.certain;
            BlStatus::Ok
        }
        Err(e) => from_error(e),
    })
}

/// Homogeneity test on `n` values in time order. `parts` is used only by
/// the chi-square split test.
///
/// # Safety
/// `values` must point to `n` doubles; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_homogeneity(
    values: *const f64,
    n: usize,
    method: BlHomogeneityMethod,
    parts: usize,
    out_statistic: *mut f64,
    out_p_value: *mut f64,
) -> BlStatus {
    non_null!(values, out_statistic, out_p_value);
    guard(|| {
        let m = match method {
            BlHomogeneityMethod::ChiSquareSplits => HomogeneityMethod::ChiSquareSplits { parts },
            BlHomogeneityMethod::TwoSampleKs => HomogeneityMethod::TwoSampleKs,
            BlHomogeneityMethod::RunsTest => HomogeneityMethod::RunsTest,
        };
        match homogeneity_test(&HomogeneityInput::Values(slice(values, n).to_vec()), m) {
            Ok(r) => {
                *out_statistic = r.statistic;
                *out_p_value = r.p_value;
                BlStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Eberhard `J` over `n` trials with the given label-to-subscript mapping.
///
/// # Safety
/// `trials` must point to `n` records; `out_j` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_eberhard_j(trials: *const BlTrial, n: usize, a1: u8, a2: u8, b1: u8, b2: u8, out_j: *mut i64) -> BlStatus {
    non_null!(trials, out_j);
    guard(|| {
        let mut v = Vec::with_capacity(n);
        for t in slice(trials, n) {
            let (Ok(a), Ok(b)) = (Outcome::try_from(t.a), Outcome::try_from(t.b)) else {
                return fail(BlStatus::InvalidArgument, format!("outcomes must be -1, 0 or 1, got ({}, {})", t.a, t.b));
            };
            v.push(PairedTrial::new(Setting(t.setting_a), Setting(t.setting_b), a, b));
        }
        let map = EberhardMapping {
            a1: Setting(a1),
            a2: Setting(a2),
            b1: Setting(b1),
            b2: Setting(b2),
        };
        *out_j = eberhard_j(&eberhard_counts(&v, map));
        BlStatus::Ok
    })
}

//! C ABI over `ris-core`.
//!
//! Objects are exposed as opaque heap handles created by `ris_*` functions
//! and released by the matching `*_free`. Every fallible call returns a
//! [`RisStatus`]; on failure a description is available from
//! [`ris_last_error_message`] on the same thread. Panics never cross the
//! boundary: they are reported as [`RisStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use ris_core::channel::{global_channel, realize, ChannelRealization};
use ris_core::config::load_config;
use ris_core::harness::trial_rng;
use ris_core::metrics::{evaluate, MetricKind};
use ris_core::optimizers::{closed_form_mse_tot, closed_form_sum_rate, muiq, OptimizerResult};
use ris_core::separation::{separate, separate_los_part};
use ris_core::{Error, PhaseVector, SeparatedChannel, SystemConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Numerical = 3,
    RankDeficient = 4,
    Config = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisMetric {
    SumRate = 0,
    ZfRate = 1,
    MmseRate = 2,
    MseTot = 3,
}

/// Metric arguments arrive as plain integers so that an out-of-range value
/// from C is an error instead of an invalid enum.
fn metric_kind(m: u32) -> Result<MetricKind, Failure> {
    const SUM: u32 = RisMetric::SumRate as u32;
    const ZF: u32 = RisMetric::ZfRate as u32;
    const MMSE: u32 = RisMetric::MmseRate as u32;
    const MSE: u32 = RisMetric::MseTot as u32;
    match m {
        SUM => Ok(MetricKind::SumRate),
        ZF => Ok(MetricKind::ZfRate),
        MMSE => Ok(MetricKind::MmseRate),
        MSE => Ok(MetricKind::MseTot),
        other => Err(Failure(
            RisStatus::Validation,
            format!("unknown metric code {other}"),
        )),
    }
}

/// System parameters.
pub struct RisConfig {
    cfg: SystemConfig,
}

/// One channel realization together with its noise power.
pub struct RisChannel {
    real: ChannelRealization,
    sigma2: f64,
}

/// A separated channel.
pub struct RisSeparated {
    sep: SeparatedChannel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(RisStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Validation(_) => RisStatus::Validation,
            Error::Numerical { .. } => RisStatus::Numerical,
            Error::RankDeficient { .. } => RisStatus::RankDeficient,
            Error::Config(_) => RisStatus::Config,
            Error::Io(_) => RisStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(RisStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            RisStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RisStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn phases_in(phases: *const f64, len: usize) -> Result<PhaseVector, Failure> {
    if len == 0 {
        return Ok(PhaseVector::continuous(std::iter::empty()));
    }
    if phases.is_null() {
        return Err(null("phases"));
    }
    Ok(PhaseVector::continuous(
        std::slice::from_raw_parts(phases, len).iter().copied(),
    ))
}

unsafe fn write_result(
    r: &OptimizerResult,
    out_phases: *mut f64,
    len: usize,
    out_objective: *mut f64,
) -> Result<(), Failure> {
    let p = r.phases.phases();
    if len < p.len() {
        return Err(Failure(
            RisStatus::BufferTooSmall,
            format!("phase buffer holds {len} values, {} needed", p.len()),
        ));
    }
    if out_phases.is_null() && !p.is_empty() {
        return Err(null("out_phases"));
    }
    if !p.is_empty() {
        std::slice::from_raw_parts_mut(out_phases, p.len()).copy_from_slice(p);
    }
    if let Some(obj) = out_objective.as_mut() {
        *obj = r.objective;
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ris_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread (empty after a success).
/// The pointer stays valid until the next `ris_*` call on the thread.
#[no_mangle]
pub extern "C" fn ris_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// New configuration with default parameters.
#[no_mangle]
pub extern "C" fn ris_config_default() -> *mut RisConfig {
    Box::into_raw(Box::new(RisConfig {
        cfg: SystemConfig::default(),
    }))
}

/// Loads system parameters from a TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ris_config_load(
    path: *const c_char,
    out: *mut *mut RisConfig,
) -> RisStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let out = deref_mut(out, "out")?;
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(RisStatus::Validation, "path is not UTF-8".into()))?;
        let (cfg, _) = load_config(Path::new(path))?;
        *out = Box::into_raw(Box::new(RisConfig { cfg }));
        Ok(())
    })
}

/// Sets the BS array (`m_y x m_z`), RIS (`n_y x n_z`) and user count.
///
/// # Safety
/// `cfg` must come from `ris_config_default` or `ris_config_load`.
#[no_mangle]
pub unsafe extern "C" fn ris_config_set_geometry(
    cfg: *mut RisConfig,
    m_y: usize,
    m_z: usize,
    n_y: usize,
    n_z: usize,
    k: usize,
) -> RisStatus {
    guard(|| {
        let c = deref_mut(cfg, "cfg")?;
        let updated = SystemConfig {
            m_y,
            m_z,
            n_y,
            n_z,
            k,
            ..c.cfg.clone()
        };
        updated.validate()?;
        c.cfg = updated;
        Ok(())
    })
}

/// Sets the RIS-BS Ricean factor; pass `INFINITY` for pure LOS.
///
/// # Safety
/// `cfg` must come from `ris_config_default` or `ris_config_load`.
#[no_mangle]
pub unsafe extern "C" fn ris_config_set_kappa_br(cfg: *mut RisConfig, kappa_br: f64) -> RisStatus {
    guard(|| {
        let c = deref_mut(cfg, "cfg")?;
        if kappa_br.is_nan() || kappa_br <= 0.0 {
            return Err(Failure(
                RisStatus::Validation,
                "kappa_br must be positive".into(),
            ));
        }
        c.cfg.kappa_br = kappa_br;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ris_config_free(cfg: *mut RisConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Draws the channel of trial `trial` for `seed`; the same pair always
/// yields the same realization (and matches the first cell of a sweep).
///
/// # Safety
/// `cfg` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ris_channel_generate(
    cfg: *const RisConfig,
    seed: u64,
    trial: usize,
    out: *mut *mut RisChannel,
) -> RisStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let out = deref_mut(out, "out")?;
        let real = realize(&c.cfg, &mut trial_rng(seed, 0, trial, 0))?;
        *out = Box::into_raw(Box::new(RisChannel {
            real,
            sigma2: c.cfg.sigma2(),
        }));
        Ok(())
    })
}

/// Writes BS antennas, RIS elements and users of a channel.
///
/// # Safety
/// `ch` must be a live handle; output pointers may be null to skip them.
#[no_mangle]
pub unsafe extern "C" fn ris_channel_dims(
    ch: *const RisChannel,
    m: *mut usize,
    n: *mut usize,
    k: *mut usize,
) -> RisStatus {
    guard(|| {
        let ch = deref(ch, "channel")?;
        if let Some(m) = m.as_mut() {
            *m = ch.real.m();
        }
        if let Some(n) = n.as_mut() {
            *n = ch.real.n();
        }
        if let Some(k) = k.as_mut() {
            *k = ch.real.k();
        }
        Ok(())
    })
}

/// # Safety
/// `ch` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ris_channel_free(ch: *mut RisChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Separates a channel. With `force` a scattered RIS-BS channel is
/// separated through its LOS part; without it such channels are rejected.
///
/// # Safety
/// `ch` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ris_separate(
    ch: *const RisChannel,
    force: bool,
    out: *mut *mut RisSeparated,
) -> RisStatus {
    guard(|| {
        let ch = deref(ch, "channel")?;
        let out = deref_mut(out, "out")?;
        let sep = if force {
            separate_los_part(&ch.real, ch.sigma2)?
        } else {
            separate(&ch.real, ch.sigma2)?
        };
        *out = Box::into_raw(Box::new(RisSeparated { sep }));
        Ok(())
    })
}

/// # Safety
/// `sep` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ris_separated_free(sep: *mut RisSeparated) {
    if !sep.is_null() {
        drop(Box::from_raw(sep));
    }
}

/// Continuous sum-rate design; writes `N` phases and the objective.
///
/// # Safety
/// `sep` must be a live handle, `out_phases` must hold `len` doubles and
/// `out_objective` may be null.
#[no_mangle]
pub unsafe extern "C" fn ris_closed_form_sum_rate(
    sep: *const RisSeparated,
    out_phases: *mut f64,
    len: usize,
    out_objective: *mut f64,
) -> RisStatus {
    guard(|| {
        let s = deref(sep, "separated channel")?;
        let r = closed_form_sum_rate(&s.sep)?;
        write_result(&r, out_phases, len, out_objective)
    })
}

/// Continuous total-MSE design; writes `N` phases and the objective.
///
/// # Safety
/// As for `ris_closed_form_sum_rate`.
#[no_mangle]
pub unsafe extern "C" fn ris_closed_form_mse_tot(
    sep: *const RisSeparated,
    out_phases: *mut f64,
    len: usize,
    out_objective: *mut f64,
) -> RisStatus {
    guard(|| {
        let s = deref(sep, "separated channel")?;
        let r = closed_form_mse_tot(&s.sep)?;
        write_result(&r, out_phases, len, out_objective)
    })
}

/// Discrete `bits`-bit design for a `RisMetric` code with `repeats` sweeps; writes the physical
/// phases and the objective.
///
/// # Safety
/// As for `ris_closed_form_sum_rate`.
#[no_mangle]
pub unsafe extern "C" fn ris_muiq(
    sep: *const RisSeparated,
    metric: u32,
    bits: u32,
    repeats: usize,
    out_phases: *mut f64,
    len: usize,
    out_objective: *mut f64,
) -> RisStatus {
    guard(|| {
        let s = deref(sep, "separated channel")?;
        let r = muiq(metric_kind(metric)?, &s.sep, bits, repeats)?;
        write_result(&r, out_phases, len, out_objective)
    })
}

/// `RisMetric` value on the full channel at the given phases.
///
/// # Safety
/// `ch` must be a live handle, `phases` must hold `len` doubles and
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ris_metric_direct(
    ch: *const RisChannel,
    metric: u32,
    phases: *const f64,
    len: usize,
    out_value: *mut f64,
) -> RisStatus {
    guard(|| {
        let ch = deref(ch, "channel")?;
        let out = deref_mut(out_value, "out_value")?;
        let p = phases_in(phases, len)?;
        let h = global_channel(&ch.real, &p)?;
        *out = evaluate(metric_kind(metric)?, &h, ch.sigma2)?;
        Ok(())
    })
}

/// `RisMetric` value through the separated form at the given phases.
///
/// # Safety
/// As for `ris_metric_direct`, with a separated-channel handle.
#[no_mangle]
pub unsafe extern "C" fn ris_metric_separated(
    sep: *const RisSeparated,
    metric: u32,
    phases: *const f64,
    len: usize,
    out_value: *mut f64,
) -> RisStatus {
    guard(|| {
        let s = deref(sep, "separated channel")?;
        let out = deref_mut(out_value, "out_value")?;
        let p = phases_in(phases, len)?;
        *out = s.sep.metric(metric_kind(metric)?, &p)?;
        Ok(())
    })
}

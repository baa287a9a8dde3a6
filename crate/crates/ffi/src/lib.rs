//! C ABI for the uavnav simulator.
//!
//! Conventions:
//!
//! * Every fallible function returns a [`UavnavStatus`]; results go through
//!   out-pointers that are written only on success.
//! * On failure a human-readable message is kept per thread and can be read
//!   with [`uavnav_last_error`].
//! * Maps and episodes are opaque handles created by this library and
//!   released with the matching `*_free` function. Freeing `NULL` is a no-op.
//! * Panics never cross the boundary; they are reported as
//!   [`UavnavStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use uavnav::agent::{quantize_state, AgentConfig, AgentMode, LearningRateSchedule};
use uavnav::channel::{path_loss_db, ChannelParams};
use uavnav::sim::{run_episode, AveragingDomain, EpisodeConfig, EpisodeLog, Motion, Outcome};
use uavnav::world::{default_map, parse_map, OccupancyMap};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavnavStatus {
    Ok = 0,
    /// A required pointer argument was `NULL`.
    NullPointer = 1,
    /// A numeric argument or config field is out of its domain.
    InvalidArgument = 2,
    /// A string argument is not valid UTF-8.
    InvalidUtf8 = 3,
    /// Map text could not be parsed or failed validation.
    MapInvalid = 4,
    /// The output buffer is too small; the required size was reported.
    BufferTooSmall = 5,
    /// An internal panic was caught.
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavnavScheduleKind {
    Fixed = 0,
    Varying = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavnavAgentMode {
    TenState = 0,
    SingleState = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavnavAveraging {
    Linear = 0,
    Db = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavnavMotion {
    Strict = 0,
    StopAtWall = 1,
}

/// Plain-data episode configuration. Fill it with
/// [`uavnav_episode_config_default`] and override fields as needed.
/// `alpha_fixed` is used for the fixed schedule, `alpha_min`/`alpha_max`
/// for the varying one.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UavnavEpisodeConfig {
    pub velocity_mps: f64,
    pub epoch_s: f64,
    pub rss_sample_interval_s: f64,
    pub smoothing_epochs: u32,
    pub epsilon: f64,
    pub gamma: f64,
    pub schedule: UavnavScheduleKind,
    pub alpha_fixed: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub mode: UavnavAgentMode,
    pub tx_power_dbm: f64,
    pub carrier_hz: f64,
    pub seed: u64,
    pub timeout_s: f64,
    /// Nonzero enables Rayleigh fading.
    pub fading: u8,
    pub averaging: UavnavAveraging,
    pub motion: UavnavMotion,
}

impl From<&EpisodeConfig> for UavnavEpisodeConfig {
    fn from(c: &EpisodeConfig) -> Self {
        let (schedule, alpha_fixed, alpha_min, alpha_max) = match c.agent.lr_schedule {
            LearningRateSchedule::Fixed { alpha } => (UavnavScheduleKind::Fixed, alpha, alpha, alpha),
            LearningRateSchedule::Varying { alpha_min, alpha_max } => {
                (UavnavScheduleKind::Varying, alpha_max, alpha_min, alpha_max)
            }
        };
        Self {
            velocity_mps: c.velocity_mps,
            epoch_s: c.epoch_s,
            rss_sample_interval_s: c.rss_sample_interval_s,
            smoothing_epochs: c.smoothing_epochs.try_into().unwrap_or(u32::MAX),
            epsilon: c.agent.epsilon,
            gamma: c.agent.gamma,
            schedule,
            alpha_fixed,
            alpha_min,
            alpha_max,
            mode: match c.agent.mode {
                AgentMode::TenState => UavnavAgentMode::TenState,
                AgentMode::SingleState => UavnavAgentMode::SingleState,
            },
            tx_power_dbm: c.channel.tx_power_dbm,
            carrier_hz: c.channel.carrier_hz,
            seed: c.seed,
            timeout_s: c.timeout_s,
            fading: c.fading as u8,
            averaging: match c.averaging {
                AveragingDomain::Linear => UavnavAveraging::Linear,
                AveragingDomain::Db => UavnavAveraging::Db,
            },
            motion: match c.motion {
                Motion::Strict => UavnavMotion::Strict,
                Motion::StopAtWall => UavnavMotion::StopAtWall,
            },
        }
    }
}

impl From<&UavnavEpisodeConfig> for EpisodeConfig {
    fn from(c: &UavnavEpisodeConfig) -> Self {
        let lr_schedule = match c.schedule {
            UavnavScheduleKind::Fixed => LearningRateSchedule::Fixed { alpha: c.alpha_fixed },
            UavnavScheduleKind::Varying => LearningRateSchedule::Varying {
                alpha_min: c.alpha_min,
                alpha_max: c.alpha_max,
            },
        };
        EpisodeConfig {
            velocity_mps: c.velocity_mps,
            epoch_s: c.epoch_s,
            rss_sample_interval_s: c.rss_sample_interval_s,
            smoothing_epochs: c.smoothing_epochs as usize,
            agent: AgentConfig {
                epsilon: c.epsilon,
                gamma: c.gamma,
                lr_schedule,
                mode: match c.mode {
                    UavnavAgentMode::TenState => AgentMode::TenState,
                    UavnavAgentMode::SingleState => AgentMode::SingleState,
                },
            },
            channel: ChannelParams {
                tx_power_dbm: c.tx_power_dbm,
                carrier_hz: c.carrier_hz,
            },
            seed: c.seed,
            timeout_s: c.timeout_s,
            fading: c.fading != 0,
            averaging: match c.averaging {
                UavnavAveraging::Linear => AveragingDomain::Linear,
                UavnavAveraging::Db => AveragingDomain::Db,
            },
            motion: match c.motion {
                UavnavMotion::Strict => Motion::Strict,
                UavnavMotion::StopAtWall => Motion::StopAtWall,
            },
        }
    }
}

/// Opaque validated occupancy map.
pub struct UavnavMap(OccupancyMap);

/// Opaque result of one episode.
pub struct UavnavEpisode {
    log: EpisodeLog,
    map: OccupancyMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    // Interior NULs cannot appear in a C string; replace them.
    let c = CString::new(message.replace('\0', "?")).expect("NULs were replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: UavnavStatus, message: impl Into<String>) -> UavnavStatus {
    set_last_error(message.into());
    status
}

/// Runs `body`, converting panics into [`UavnavStatus::Panic`].
fn guard<F: FnOnce() -> UavnavStatus>(body: F) -> UavnavStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(UavnavStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

/// Message describing the most recent failure on this thread, or `NULL` if
/// there was none. The pointer stays valid until the next failing call on
/// the same thread.
#[no_mangle]
pub extern "C" fn uavnav_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn uavnav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Path loss in dB at `distance_m` meters.
///
/// # Safety
/// `out_db` must be `NULL` or valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn uavnav_path_loss_db(distance_m: f64, out_db: *mut f64) -> UavnavStatus {
    guard(|| {
        if out_db.is_null() {
            return fail(UavnavStatus::NullPointer, "out_db is NULL");
        }
        match path_loss_db(distance_m) {
            Ok(v) => {
                unsafe { *out_db = v };
                UavnavStatus::Ok
            }
            Err(e) => fail(UavnavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// RSS state (1 = strongest .. 10 = weakest) for an RSS value in dBm.
///
/// # Safety
/// `out_state` must be `NULL` or valid for a write of one `uint8_t`.
#[no_mangle]
pub unsafe extern "C" fn uavnav_quantize_state(rss_dbm: f64, out_state: *mut u8) -> UavnavStatus {
    guard(|| {
        if out_state.is_null() {
            return fail(UavnavStatus::NullPointer, "out_state is NULL");
        }
        match quantize_state(rss_dbm) {
            Ok(s) => {
                unsafe { *out_state = s.index() as u8 };
                UavnavStatus::Ok
            }
            Err(e) => fail(UavnavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Parses NUL-terminated map text into a new handle.
///
/// # Safety
/// `text` must be `NULL` or a valid NUL-terminated string; `out_map` must be
/// `NULL` or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn uavnav_map_parse(text: *const c_char, out_map: *mut *mut UavnavMap) -> UavnavStatus {
    guard(|| {
        if text.is_null() || out_map.is_null() {
            return fail(UavnavStatus::NullPointer, "text or out_map is NULL");
        }
        let text = match unsafe { CStr::from_ptr(text) }.to_str() {
            Ok(t) => t,
            Err(e) => return fail(UavnavStatus::InvalidUtf8, format!("map text: {e}")),
        };
        match parse_map(text) {
            Ok(map) => {
                unsafe { *out_map = Box::into_raw(Box::new(UavnavMap(map))) };
                UavnavStatus::Ok
            }
            Err(e) => fail(UavnavStatus::MapInvalid, e.to_string()),
        }
    })
}

/// Creates a handle for the bundled default map.
///
/// # Safety
/// `out_map` must be `NULL` or valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn uavnav_map_default(out_map: *mut *mut UavnavMap) -> UavnavStatus {
    guard(|| {
        if out_map.is_null() {
            return fail(UavnavStatus::NullPointer, "out_map is NULL");
        }
        unsafe { *out_map = Box::into_raw(Box::new(UavnavMap(default_map()))) };
        UavnavStatus::Ok
    })
}

/// Grid extent in cells and cell size in meters. Any out-pointer may be
/// `NULL` to skip that value.
///
/// # Safety
/// `map` must be `NULL` or a live handle; non-NULL out-pointers must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavnav_map_dimensions(
    map: *const UavnavMap,
    out_width: *mut u32,
    out_height: *mut u32,
    out_cell_size_m: *mut f64,
) -> UavnavStatus {
    guard(|| {
        let Some(map) = (unsafe { map.as_ref() }) else {
            return fail(UavnavStatus::NullPointer, "map is NULL");
        };
        unsafe {
            if !out_width.is_null() {
                *out_width = map.0.width_cells() as u32;
            }
            if !out_height.is_null() {
                *out_height = map.0.height_cells() as u32;
            }
            if !out_cell_size_m.is_null() {
                *out_cell_size_m = map.0.cell_size_m();
            }
        }
        UavnavStatus::Ok
    })
}

/// Releases a map handle.
///
/// # Safety
/// `map` must be `NULL` or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uavnav_map_free(map: *mut UavnavMap) {
    if !map.is_null() {
        drop(unsafe { Box::from_raw(map) });
    }
}

/// Writes the library's default episode configuration.
///
/// # Safety
/// `out_config` must be `NULL` or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavnav_episode_config_default(out_config: *mut UavnavEpisodeConfig) -> UavnavStatus {
    guard(|| {
        if out_config.is_null() {
            return fail(UavnavStatus::NullPointer, "out_config is NULL");
        }
        unsafe { *out_config = UavnavEpisodeConfig::from(&EpisodeConfig::default()) };
        UavnavStatus::Ok
    })
}

/// Runs one episode on `map` and returns a new episode handle.
///
/// # Safety
/// `map` must be `NULL` or a live handle, `config` `NULL` or a valid
/// pointer, and `out_episode` `NULL` or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavnav_run_episode(
    map: *const UavnavMap,
    config: *const UavnavEpisodeConfig,
    out_episode: *mut *mut UavnavEpisode,
) -> UavnavStatus {
    guard(|| {
        let (Some(map), Some(config)) = (unsafe { map.as_ref() }, unsafe { config.as_ref() }) else {
            return fail(UavnavStatus::NullPointer, "map or config is NULL");
        };
        if out_episode.is_null() {
            return fail(UavnavStatus::NullPointer, "out_episode is NULL");
        }
        match run_episode(&map.0, &EpisodeConfig::from(config)) {
            Ok(log) => {
                let episode = UavnavEpisode {
                    log,
                    map: map.0.clone(),
                };
                unsafe { *out_episode = Box::into_raw(Box::new(episode)) };
                UavnavStatus::Ok
            }
            Err(e) => fail(UavnavStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Episode outcome. `out_converged` receives 1 or 0; `out_time_s` the
/// convergence time, or the elapsed time of a timed-out run. Any
/// out-pointer may be `NULL`.
///
/// # Safety
/// `episode` must be `NULL` or a live handle; non-NULL out-pointers must be
/// valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavnav_episode_outcome(
    episode: *const UavnavEpisode,
    out_converged: *mut u8,
    out_time_s: *mut f64,
    out_final_distance_m: *mut f64,
) -> UavnavStatus {
    guard(|| {
        let Some(ep) = (unsafe { episode.as_ref() }) else {
            return fail(UavnavStatus::NullPointer, "episode is NULL");
        };
        let (converged, time_s, dist) = match ep.log.outcome {
            Outcome::Converged {
                time_s,
                final_distance_m,
            } => (1, time_s, final_distance_m),
            Outcome::TimedOut {
                time_s,
                final_distance_m,
            } => (0, time_s, final_distance_m),
        };
        unsafe {
            if !out_converged.is_null() {
                *out_converged = converged;
            }
            if !out_time_s.is_null() {
                *out_time_s = time_s;
            }
            if !out_final_distance_m.is_null() {
                *out_final_distance_m = dist;
            }
        }
        UavnavStatus::Ok
    })
}

/// Number of decision epochs recorded.
///
/// # Safety
/// `episode` must be `NULL` or a live handle; `out_count` `NULL` or valid
/// for one write.
#[no_mangle]
pub unsafe extern "C" fn uavnav_episode_step_count(
    episode: *const UavnavEpisode,
    out_count: *mut usize,
) -> UavnavStatus {
    guard(|| {
        let Some(ep) = (unsafe { episode.as_ref() }) else {
            return fail(UavnavStatus::NullPointer, "episode is NULL");
        };
        if out_count.is_null() {
            return fail(UavnavStatus::NullPointer, "out_count is NULL");
        }
        unsafe { *out_count = ep.log.steps.len() };
        UavnavStatus::Ok
    })
}

/// Copies the episode log as JSON lines into `buf`, NUL-terminated.
///
/// `out_needed` (required) receives the buffer size including the NUL.
/// Pass `buf = NULL` and `capacity = 0` to query it; a too-small buffer
/// returns [`UavnavStatus::BufferTooSmall`] and is left untouched.
///
/// # Safety
/// `episode` must be `NULL` or a live handle; `buf` must be `NULL` or valid
/// for `capacity` bytes; `out_needed` `NULL` or valid for one write.
#[no_mangle]
pub unsafe extern "C" fn uavnav_episode_jsonl(
    episode: *const UavnavEpisode,
    buf: *mut c_char,
    capacity: usize,
    out_needed: *mut usize,
) -> UavnavStatus {
    guard(|| {
        let Some(ep) = (unsafe { episode.as_ref() }) else {
            return fail(UavnavStatus::NullPointer, "episode is NULL");
        };
        if out_needed.is_null() {
            return fail(UavnavStatus::NullPointer, "out_needed is NULL");
        }
        let text = ep.log.to_jsonl(&ep.map);
        let needed = text.len() + 1;
        unsafe { *out_needed = needed };
        if buf.is_null() || capacity < needed {
            return fail(
                UavnavStatus::BufferTooSmall,
                format!("log needs {needed} bytes, buffer has {capacity}"),
            );
        }
        unsafe {
            ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
            *buf.add(text.len()) = 0;
        }
        UavnavStatus::Ok
    })
}

/// Releases an episode handle.
///
/// # Safety
/// `episode` must be `NULL` or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uavnav_episode_free(episode: *mut UavnavEpisode) {
    if !episode.is_null() {
        drop(unsafe { Box::from_raw(episode) });
    }
}

//! Received signal strength model.
//!
//! RSS is the transmit power minus the log-distance path loss plus a signed
//! fading gain in dB:
//!
//! ```text
//! rss_dbm = tx_power_dbm - (128.1 + 37.6 * log10(d / 1000)) + 10 * log10(|h(t)|^2)
//! ```
//!
//! `h(t)` is a unit-power complex Rayleigh process built as a sum of
//! sinusoids whose Doppler spread follows the UAV speed. Positive gain means
//! constructive multipath, so a deep fade lowers the returned RSS.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::error::DomainError;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT_MPS: f64 = 299_792_458.0;

/// Path loss is evaluated no closer than this distance.
pub const MIN_DISTANCE_M: f64 = 0.1;

/// Oscillators per quadrature branch used by [`create_fading`].
pub const DEFAULT_NUM_SINUSOIDS: usize = 64;

/// Lower bound on the oscillator count of a fading process.
pub const MIN_NUM_SINUSOIDS: usize = 8;

/// Transmitter and carrier parameters. Immutable and freely shared.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelParams {
    pub tx_power_dbm: f64,
    pub carrier_hz: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            tx_power_dbm: 0.0,
            carrier_hz: 2.4e9,
        }
    }
}

impl ChannelParams {
    pub fn new(tx_power_dbm: f64, carrier_hz: f64) -> Result<Self, DomainError> {
        let params = Self {
            tx_power_dbm,
            carrier_hz,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if !self.tx_power_dbm.is_finite() {
            return Err(DomainError::new("tx_power_dbm", self.tx_power_dbm, "must be finite"));
        }
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(DomainError::new("carrier_hz", self.carrier_hz, "must be > 0"));
        }
        Ok(())
    }

    /// Doppler frequency seen by a receiver moving at `velocity_mps`.
    pub fn doppler_hz(&self, velocity_mps: f64) -> f64 {
        velocity_mps * self.carrier_hz / SPEED_OF_LIGHT_MPS
    }
}

/// One RSS observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RssSample {
    pub time_s: f64,
    pub rss_dbm: f64,
}

/// 3GPP log-distance path loss in dB. Distances under [`MIN_DISTANCE_M`] are
/// clamped.
pub fn path_loss_db(distance_m: f64) -> Result<f64, DomainError> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(DomainError::new("distance_m", distance_m, "must be finite and > 0"));
    }
    Ok(path_loss_db_unchecked(distance_m.max(MIN_DISTANCE_M)))
}

#[inline]
fn path_loss_db_unchecked(distance_m: f64) -> f64 {
    128.1 + 37.6 * (distance_m / 1000.0).log10()
}

/// Correlated Rayleigh fading gain generator.
///
/// Each quadrature branch is a sum of `num_sinusoids` cosines. Arrival
/// angles are drawn uniformly inside equal sub-sectors of the first
/// quadrant, one per oscillator, and every oscillator gets an independent
/// uniform phase. The branches therefore have variance 1/2 each, the real
/// part has autocorrelation close to `J0(2 pi f_d tau)`, and `|h|^2` has unit
/// time average.
///
/// Evaluation is a pure function of time, so a process may be shared across
/// threads once built.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingProcess {
    doppler_hz: f64,
    seed: u64,
    in_phase: Vec<Oscillator>,
    quadrature: Vec<Oscillator>,
    amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Oscillator {
    omega: f64,
    phase: f64,
}

/// Builds the fading process for a receiver moving at `velocity_mps`.
pub fn create_fading(velocity_mps: f64, params: &ChannelParams, seed: u64) -> Result<FadingProcess, DomainError> {
    FadingProcess::with_sinusoids(velocity_mps, params, seed, DEFAULT_NUM_SINUSOIDS)
}

impl FadingProcess {
    pub fn with_sinusoids(
        velocity_mps: f64,
        params: &ChannelParams,
        seed: u64,
        num_sinusoids: usize,
    ) -> Result<Self, DomainError> {
        if !(velocity_mps.is_finite() && velocity_mps >= 0.0) {
            return Err(DomainError::new(
                "velocity_mps",
                velocity_mps,
                "must be finite and >= 0",
            ));
        }
        if num_sinusoids < MIN_NUM_SINUSOIDS {
            return Err(DomainError::new("num_sinusoids", num_sinusoids as f64, "must be >= 8"));
        }
        params.validate()?;

        let doppler_hz = params.doppler_hz(velocity_mps);
        let omega_d = 2.0 * PI * doppler_hz;
        let n = num_sinusoids as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut in_phase = Vec::with_capacity(num_sinusoids);
        let mut quadrature = Vec::with_capacity(num_sinusoids);
        for k in 0..num_sinusoids {
            let jitter: f64 = rng.gen_range(-PI..PI);
            let angle = (2.0 * PI * (k as f64 + 1.0) - PI + jitter) / (4.0 * n);
            let phase_i: f64 = rng.gen_range(-PI..PI);
            let phase_q: f64 = rng.gen_range(-PI..PI);
            in_phase.push(Oscillator {
                omega: omega_d * angle.cos(),
                phase: phase_i,
            });
            quadrature.push(Oscillator {
                omega: omega_d * angle.sin(),
                phase: phase_q,
            });
        }

        Ok(Self {
            doppler_hz,
            seed,
            in_phase,
            quadrature,
            amplitude: (1.0 / n).sqrt(),
        })
    }

    pub fn doppler_hz(&self) -> f64 {
        self.doppler_hz
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_sinusoids(&self) -> usize {
        self.in_phase.len()
    }

    /// Complex envelope `h(t)` as `(re, im)`.
    pub fn envelope(&self, time_s: f64) -> (f64, f64) {
        let branch =
            |bank: &[Oscillator]| -> f64 { bank.iter().map(|o| (o.omega * time_s + o.phase).cos()).sum::<f64>() };
        (
            self.amplitude * branch(&self.in_phase),
            self.amplitude * branch(&self.quadrature),
        )
    }

    /// `|h(t)|^2`, linear.
    pub fn power_gain(&self, time_s: f64) -> f64 {
        let (re, im) = self.envelope(time_s);
        re * re + im * im
    }

    /// Evenly spaced power gains starting at `start_s`, computed with a
    /// second-order oscillator recurrence that is re-anchored from the exact
    /// values on every call.
    pub fn power_gains(&self, start_s: f64, step_s: f64) -> PowerGains<'_> {
        PowerGains::new(self, start_s, step_s)
    }
}

/// Iterator over `|h(t0 + k dt)|^2` for `k = 0, 1, ...`.
///
/// Each oscillator follows `c[k+1] = 2 cos(w dt) c[k] - c[k-1]`, which costs
/// one multiply-add per oscillator per sample.
#[derive(Debug, Clone)]
pub struct PowerGains<'a> {
    process: &'a FadingProcess,
    in_phase: Vec<Lanes>,
    quadrature: Vec<Lanes>,
}

const LANES: usize = 8;

/// Recurrence state of up to eight oscillators, laid out so that one step
/// is a handful of fixed-width vector operations. Unused slots hold zeros
/// and stay zero.
#[derive(Debug, Clone, Copy, Default)]
struct Lanes {
    coeff: [f64; LANES],
    prev: [f64; LANES],
    cur: [f64; LANES],
}

impl Lanes {
    fn pack(oscillators: &[Oscillator], start_s: f64, step_s: f64) -> Vec<Lanes> {
        oscillators
            .chunks(LANES)
            .map(|chunk| {
                let mut l = Lanes::default();
                for (j, o) in chunk.iter().enumerate() {
                    l.coeff[j] = 2.0 * (o.omega * step_s).cos();
                    // cos at t0 - dt, so the first `next` yields t0.
                    l.prev[j] = (o.omega * (start_s - step_s) + o.phase).cos();
                    l.cur[j] = (o.omega * start_s + o.phase).cos();
                }
                l
            })
            .collect()
    }

    #[allow(clippy::needless_range_loop)]
    fn step(&mut self, acc: &mut [f64; LANES]) {
        for j in 0..LANES {
            acc[j] += self.cur[j];
            let next = self.coeff[j] * self.cur[j] - self.prev[j];
            self.prev[j] = self.cur[j];
            self.cur[j] = next;
        }
    }
}

fn lane_sum(acc: &[f64; LANES]) -> f64 {
    acc.chunks(2).map(|p| p[0] + p[1]).sum()
}

impl<'a> PowerGains<'a> {
    fn new(process: &'a FadingProcess, start_s: f64, step_s: f64) -> Self {
        Self {
            process,
            in_phase: Lanes::pack(&process.in_phase, start_s, step_s),
            quadrature: Lanes::pack(&process.quadrature, start_s, step_s),
        }
    }
}

impl Iterator for PowerGains<'_> {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        // Both branches have the same length; stepping them together keeps
        // two independent accumulator chains in flight.
        let (mut acc_re, mut acc_im) = ([0.0; LANES], [0.0; LANES]);
        for (i, q) in self.in_phase.iter_mut().zip(self.quadrature.iter_mut()) {
            i.step(&mut acc_re);
            q.step(&mut acc_im);
        }
        let (re, im) = (lane_sum(&acc_re), lane_sum(&acc_im));
        let a = self.process.amplitude;
        Some(a * a * (re * re + im * im))
    }
}

/// Fading gain in dB at `time_s`.
pub fn fading_gain_db(process: &FadingProcess, time_s: f64) -> Result<f64, DomainError> {
    if !(time_s.is_finite() && time_s >= 0.0) {
        return Err(DomainError::new("time_s", time_s, "must be finite and >= 0"));
    }
    Ok(10.0 * process.power_gain(time_s).log10())
}

/// Instantaneous RSS in dBm.
pub fn rss_instant(
    params: &ChannelParams,
    distance_m: f64,
    process: &FadingProcess,
    time_s: f64,
) -> Result<f64, DomainError> {
    Ok(params.tx_power_dbm - path_loss_db(distance_m)? + fading_gain_db(process, time_s)?)
}

/// Converts dBm to milliwatts.
#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Converts milliwatts to dBm.
#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

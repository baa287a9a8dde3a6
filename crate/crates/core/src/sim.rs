//! Episode loop.
//!
//! Time advances in decision epochs of `epoch_s` seconds. During epoch `i`
//! the UAV flies the segment chosen at the end of epoch `i - 1` (epoch 0 is
//! spent hovering at the start) while RSS is sampled every
//! `rss_sample_interval_s`. At the end of the epoch:
//!
//! 1. the samples are averaged into one epoch value, and the last
//!    `smoothing_epochs` epoch values are averaged again;
//! 2. the reward is the change of that smoothed value since the previous
//!    epoch, and the smoothed value is binned into the next state;
//! 3. the Q entry of the previous (state, action) pair is updated with the
//!    learning rate of the new state;
//! 4. unless the new state is terminal, an epsilon-greedy action is chosen.
//!    If its heading is blocked, another untried action is drawn uniformly
//!    until one can be flown; if none can the UAV holds position. What
//!    "blocked" means depends on [`Motion`].
//!
//! All randomness comes from one ChaCha8 stream seeded by `seed`.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::{
    is_terminal, learning_rate_for, quantize_state, reward, select_action, update_q, AgentConfig, QTable, StateId,
};
use crate::channel::{self, create_fading, ChannelParams, FadingProcess, RssSample};
use crate::error::DomainError;
use crate::world::{free_run_m, is_segment_free, target_of, ActionId, OccupancyMap, Pose};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid episode config: {0}")]
    InvalidConfig(#[from] DomainError),
}

/// What happens when an epoch segment would reach a wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Motion {
    /// The heading is rejected unless the whole segment is clear.
    Strict,
    /// The UAV flies until it is half a cell from the wall and hovers for
    /// the rest of the epoch. Headings with less than one cell of clearance
    /// are rejected.
    #[default]
    StopAtWall,
}

impl fmt::Display for Motion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Motion::Strict => "strict",
            Motion::StopAtWall => "stop-at-wall",
        })
    }
}

impl FromStr for Motion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Motion::Strict),
            "stop-at-wall" => Ok(Motion::StopAtWall),
            _ => Err(format!("unknown motion `{s}` (expected strict or stop-at-wall)")),
        }
    }
}

/// Domain in which RSS values are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AveragingDomain {
    /// Mean of milliwatt values.
    #[default]
    Linear,
    /// Mean of dBm values.
    Db,
}

impl AveragingDomain {
    /// Mean of `values_dbm` in this domain, returned in dBm.
    pub fn mean_dbm<I: IntoIterator<Item = f64>>(self, values_dbm: I) -> Option<f64> {
        let mut n = 0usize;
        let mut acc = 0.0;
        for v in values_dbm {
            acc += match self {
                AveragingDomain::Linear => channel::dbm_to_mw(v),
                AveragingDomain::Db => v,
            };
            n += 1;
        }
        if n == 0 {
            return None;
        }
        let mean = acc / n as f64;
        Some(match self {
            AveragingDomain::Linear => channel::mw_to_dbm(mean),
            AveragingDomain::Db => mean,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpisodeConfig {
    pub velocity_mps: f64,
    pub epoch_s: f64,
    pub rss_sample_interval_s: f64,
    pub smoothing_epochs: usize,
    pub agent: AgentConfig,
    pub channel: ChannelParams,
    pub seed: u64,
    pub timeout_s: f64,
    /// When false the fading gain is fixed at 0 dB.
    pub fading: bool,
    pub averaging: AveragingDomain,
    pub motion: Motion,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            velocity_mps: 5.0,
            epoch_s: 2.0,
            rss_sample_interval_s: 1e-3,
            smoothing_epochs: 3,
            agent: AgentConfig::default(),
            channel: ChannelParams::default(),
            seed: 1,
            timeout_s: 3600.0,
            fading: true,
            averaging: AveragingDomain::Linear,
            motion: Motion::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.velocity_mps.is_finite() && self.velocity_mps > 0.0) {
            return Err(DomainError::new("velocity_mps", self.velocity_mps, "must be > 0"));
        }
        if !(self.epoch_s.is_finite() && self.epoch_s > 0.0) {
            return Err(DomainError::new("epoch_s", self.epoch_s, "must be > 0"));
        }
        let dt = self.rss_sample_interval_s;
        if !(dt.is_finite() && dt > 0.0 && dt <= self.epoch_s) {
            return Err(DomainError::new(
                "rss_sample_interval_s",
                dt,
                "must lie in (0, epoch_s]",
            ));
        }
        if self.smoothing_epochs == 0 {
            return Err(DomainError::new("smoothing_epochs", 0.0, "must be >= 1"));
        }
        if !(self.timeout_s.is_finite() && self.timeout_s > self.epoch_s) {
            return Err(DomainError::new("timeout_s", self.timeout_s, "must exceed epoch_s"));
        }
        self.agent.validate()?;
        self.channel.validate()
    }

    /// RSS samples taken in every epoch.
    pub fn samples_per_epoch(&self) -> usize {
        // Guard against 0.5 / 0.001 = 499.99999...
        ((self.epoch_s / self.rss_sample_interval_s) * (1.0 + 1e-12))
            .floor()
            .max(1.0) as usize
    }

    /// Length of one epoch's flight segment.
    pub fn step_length_m(&self) -> f64 {
        self.velocity_mps * self.epoch_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepRecord {
    pub epoch_index: u64,
    /// Start of the epoch.
    pub time_s: f64,
    /// Position at the start of the epoch.
    pub pose: Pose,
    /// Action chosen at the end of the epoch; `None` when the episode ended
    /// or every heading was blocked.
    pub action: Option<ActionId>,
    /// Extra headings tried after the first choice hit an obstacle.
    pub retried_actions: u32,
    pub raw_epoch_rss_dbm: f64,
    pub smoothed_rss_dbm: f64,
    pub state: StateId,
    pub reward: f64,
    pub alpha_used: f64,
    /// Ground truth at the start of the epoch. Logged only.
    pub true_distance_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Converged { time_s: f64, final_distance_m: f64 },
    TimedOut { time_s: f64, final_distance_m: f64 },
}

impl Outcome {
    pub fn converged(&self) -> bool {
        matches!(self, Outcome::Converged { .. })
    }

    /// Convergence time, `None` for a censored run.
    pub fn convergence_time_s(&self) -> Option<f64> {
        match *self {
            Outcome::Converged { time_s, .. } => Some(time_s),
            Outcome::TimedOut { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub config: EpisodeConfig,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
}

#[derive(serde::Serialize)]
struct MapEcho {
    width_cells: usize,
    height_cells: usize,
    cell_size_m: f64,
    start: Pose,
    source: Pose,
}

#[derive(serde::Serialize)]
struct ConfigEcho<'a> {
    record: &'static str,
    #[serde(flatten)]
    config: &'a EpisodeConfig,
    samples_per_epoch: usize,
    map: MapEcho,
}

#[derive(serde::Serialize)]
struct OutcomeRecord<'a> {
    record: &'static str,
    steps: usize,
    #[serde(flatten)]
    outcome: &'a Outcome,
}

impl EpisodeLog {
    /// Writes the log as JSON lines: a config record, one line per step,
    /// then an outcome record. Field order is fixed.
    pub fn write_jsonl<W: Write>(&self, map: &OccupancyMap, mut out: W) -> io::Result<()> {
        let echo = ConfigEcho {
            record: "config",
            config: &self.config,
            samples_per_epoch: self.config.samples_per_epoch(),
            map: MapEcho {
                width_cells: map.width_cells(),
                height_cells: map.height_cells(),
                cell_size_m: map.cell_size_m(),
                start: map.start(),
                source: map.source(),
            },
        };
        serde_json::to_writer(&mut out, &echo)?;
        out.write_all(b"\n")?;
        for step in &self.steps {
            serde_json::to_writer(&mut out, step)?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(
            &mut out,
            &OutcomeRecord {
                record: "outcome",
                steps: self.steps.len(),
                outcome: &self.outcome,
            },
        )?;
        out.write_all(b"\n")
    }

    pub fn to_jsonl(&self, map: &OccupancyMap) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(map, &mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

/// Power mean of one epoch's samples, in dBm.
pub fn epoch_average_rss(samples: &[RssSample]) -> Result<f64, DomainError> {
    AveragingDomain::Linear
        .mean_dbm(samples.iter().map(|s| s.rss_dbm))
        .ok_or(DomainError::new("samples", 0.0, "need at least one RSS sample"))
}

/// Power mean of the last `k` epoch averages (fewer during warm-up).
pub fn smoothed_rss(history_dbm: &[f64], k: usize) -> Result<f64, DomainError> {
    smoothed_rss_in(AveragingDomain::Linear, history_dbm, k)
}

fn smoothed_rss_in(domain: AveragingDomain, history_dbm: &[f64], k: usize) -> Result<f64, DomainError> {
    let take = k.max(1).min(history_dbm.len());
    domain
        .mean_dbm(history_dbm[history_dbm.len() - take..].iter().copied())
        .ok_or(DomainError::new("history", 0.0, "need at least one epoch average"))
}

/// Runs one episode and keeps the full trace.
pub fn run_episode(map: &OccupancyMap, config: &EpisodeConfig) -> Result<EpisodeLog, SimError> {
    let mut steps = Vec::new();
    let outcome = simulate(map, config, |s| steps.push(*s))?;
    Ok(EpisodeLog {
        config: *config,
        steps,
        outcome,
    })
}

/// Runs one episode and returns only its outcome.
pub fn run_episode_outcome(map: &OccupancyMap, config: &EpisodeConfig) -> Result<Outcome, SimError> {
    simulate(map, config, |_| {})
}

struct Sensor {
    fading: Option<FadingProcess>,
    source: Pose,
    /// Path-loss intercept in mW for the configured transmit power.
    intercept_mw: f64,
    dt: f64,
    speed: f64,
    n: usize,
    domain: AveragingDomain,
}

impl Sensor {
    /// Average RSS (dBm) over an epoch flown from `from` to `to` starting at
    /// `t0`.
    fn epoch_average(&self, t0: f64, from: &Pose, to: &Pose) -> f64 {
        let n = self.n as f64;
        let moving = from != to;
        // Fraction of the segment covered per sample when flying at the
        // commanded speed; a shortened segment ends early and the UAV
        // hovers at its end for the rest of the epoch.
        let per_sample = if moving {
            self.speed * self.dt / from.distance_to(to)
        } else {
            0.0
        };
        let mut gains = self.fading.as_ref().map(|f| f.power_gains(t0, self.dt));
        let mut acc = 0.0;
        for k in 0..self.n {
            let p = if moving {
                from.lerp(to, (k as f64 * per_sample).min(1.0))
            } else {
                *from
            };
            let d2 = ((p.x_m - self.source.x_m).powi(2) + (p.y_m - self.source.y_m).powi(2))
                .max(channel::MIN_DISTANCE_M * channel::MIN_DISTANCE_M);
            // (d / 1000 m)^-3.76 computed from the squared distance.
            let mw = self.intercept_mw * (d2 * 1e-6).powf(-1.88);
            let g = gains.as_mut().map_or(1.0, |it| it.next().expect("unbounded"));
            acc += match self.domain {
                AveragingDomain::Linear => mw * g,
                AveragingDomain::Db => channel::mw_to_dbm(mw * g),
            };
        }
        let mean = acc / n;
        match self.domain {
            AveragingDomain::Linear => channel::mw_to_dbm(mean),
            AveragingDomain::Db => mean,
        }
    }
}

fn simulate<F: FnMut(&StepRecord)>(
    map: &OccupancyMap,
    config: &EpisodeConfig,
    mut on_step: F,
) -> Result<Outcome, SimError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let fading_seed: u64 = rng.gen();
    let fading = if config.fading {
        Some(create_fading(config.velocity_mps, &config.channel, fading_seed)?)
    } else {
        None
    };
    let sensor = Sensor {
        fading,
        source: map.source(),
        intercept_mw: channel::dbm_to_mw(config.channel.tx_power_dbm - 128.1),
        dt: config.rss_sample_interval_s,
        speed: config.velocity_mps,
        n: config.samples_per_epoch(),
        domain: config.averaging,
    };

    let agent = &config.agent;
    let step_len = config.step_length_m();
    let k = config.smoothing_epochs;
    let mut q = QTable::new(agent.mode);
    let mut pose = map.start();
    let mut target: Option<Pose> = None;
    let mut history: VecDeque<f64> = VecDeque::with_capacity(k);
    let mut prev_smoothed: Option<f64> = None;
    let mut pending: Option<(StateId, ActionId)> = None;

    for epoch in 0u64.. {
        let t0 = epoch as f64 * config.epoch_s;
        let t1 = (epoch + 1) as f64 * config.epoch_s;
        if t1 > config.timeout_s * (1.0 + 1e-12) {
            return Ok(Outcome::TimedOut {
                time_s: t0,
                final_distance_m: map.distance_to_source(&pose),
            });
        }

        let start = pose;
        let end = target.take().unwrap_or(start);
        let raw = sensor.epoch_average(t0, &start, &end);
        if history.len() == k {
            history.pop_front();
        }
        history.push_back(raw);
        let smoothed = smoothed_rss_in(config.averaging, history.make_contiguous(), k)?;
        let r = prev_smoothed.map_or(0.0, |p| reward(p, smoothed));
        prev_smoothed = Some(smoothed);
        let s_next = quantize_state(smoothed)?;
        let alpha = learning_rate_for(&agent.lr_schedule, s_next);
        if let Some((s, a)) = pending.take() {
            update_q(&mut q, s, a, r, s_next, alpha, agent.gamma);
        }
        pose = end;

        let mut record = StepRecord {
            epoch_index: epoch,
            time_s: t0,
            pose: start,
            action: None,
            retried_actions: 0,
            raw_epoch_rss_dbm: raw,
            smoothed_rss_dbm: smoothed,
            state: s_next,
            reward: r,
            alpha_used: alpha,
            true_distance_m: map.distance_to_source(&start),
        };

        if is_terminal(s_next) {
            on_step(&record);
            return Ok(Outcome::Converged {
                time_s: t1,
                final_distance_m: map.distance_to_source(&pose),
            });
        }

        let first = select_action(&q, s_next, agent.epsilon, &mut rng);
        let (committed, retried) = resolve_obstacles(map, &pose, first, step_len, config.motion, &mut rng);
        record.retried_actions = retried;
        if let Some((a, dest)) = committed {
            record.action = Some(a);
            pending = Some((s_next, a));
            target = Some(dest);
        }
        on_step(&record);
    }
    unreachable!("epoch counter overflowed")
}

/// Tries `first`, then uniformly drawn untried headings, until one can be
/// flown. Returns the committed action and its end point (or `None` when
/// all eight are blocked) plus the number of retries.
fn resolve_obstacles<R: Rng>(
    map: &OccupancyMap,
    pose: &Pose,
    first: ActionId,
    step_len: f64,
    motion: Motion,
    rng: &mut R,
) -> (Option<(ActionId, Pose)>, u32) {
    let mut untried: Vec<ActionId> = ActionId::all().filter(|a| *a != first).collect();
    let mut candidate = first;
    let mut retried = 0;
    loop {
        if let Some(dest) = flight_end(map, pose, candidate, step_len, motion) {
            return (Some((candidate, dest)), retried);
        }
        if untried.is_empty() {
            return (None, retried);
        }
        candidate = untried.swap_remove(rng.gen_range(0..untried.len()));
        retried += 1;
    }
}

fn flight_end(map: &OccupancyMap, pose: &Pose, action: ActionId, step_len: f64, motion: Motion) -> Option<Pose> {
    match motion {
        Motion::Strict => {
            let dest = target_of(pose, action, step_len);
            is_segment_free(map, pose, &dest).then_some(dest)
        }
        Motion::StopAtWall => {
            let clear = free_run_m(map, pose, action, step_len);
            if clear >= step_len {
                return Some(target_of(pose, action, step_len));
            }
            let cell = map.cell_size_m();
            let run = clear - 0.5 * cell;
            (run >= cell).then(|| target_of(pose, action, run))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{AgentMode, LearningRateSchedule};
    use crate::world::{default_map, parse_map};

    fn samples(dbm: &[f64]) -> Vec<RssSample> {
        dbm.iter()
            .enumerate()
            .map(|(i, &rss_dbm)| RssSample {
                time_s: i as f64 * 1e-3,
                rss_dbm,
            })
            .collect()
    }

    #[test]
    fn epoch_average_examples() {
        let v = epoch_average_rss(&samples(&[-90.0, -80.0])).unwrap();
        assert!((v - (-82.596_373_105_057_56)).abs() < 1e-9, "{v}");
        assert!((v - -82.60).abs() < 0.005);
        let v = epoch_average_rss(&samples(&[-73.0; 5])).unwrap();
        assert!((v - -73.0).abs() < 1e-12);
        let v = epoch_average_rss(&samples(&[-40.0, -120.0])).unwrap();
        let oracle = 10.0 * ((1e-4 + 1e-12) / 2.0f64).log10();
        assert!((v - oracle).abs() < 1e-9 && (v - -43.01).abs() < 0.005, "{v}");
        assert!(epoch_average_rss(&[]).is_err());
    }

    #[test]
    fn smoothing_window() {
        assert!((smoothed_rss(&[-80.0, -80.0, -80.0], 3).unwrap() - -80.0).abs() < 1e-12);
        assert!((smoothed_rss(&[-90.0], 3).unwrap() - -90.0).abs() < 1e-12);
        let h = [-60.0, -75.0, -82.5];
        assert_eq!(smoothed_rss(&h, 1).unwrap(), -82.5);
        // Only the last three of four count.
        let a = smoothed_rss(&[-10.0, -80.0, -80.0, -80.0], 3).unwrap();
        assert!((a - -80.0).abs() < 1e-12);
        assert!(smoothed_rss(&[], 3).is_err());
    }

    #[test]
    fn db_domain_is_arithmetic_mean() {
        let v = AveragingDomain::Db.mean_dbm([-90.0, -80.0]).unwrap();
        assert_eq!(v, -85.0);
    }

    #[test]
    fn samples_per_epoch_rounding() {
        let mut c = EpisodeConfig {
            epoch_s: 0.5,
            rss_sample_interval_s: 1e-3,
            ..EpisodeConfig::default()
        };
        assert_eq!(c.samples_per_epoch(), 500);
        c.epoch_s = 8.0;
        assert_eq!(c.samples_per_epoch(), 8000);
        c.rss_sample_interval_s = 3.0;
        assert_eq!(c.samples_per_epoch(), 2);
    }

    #[test]
    fn config_validation() {
        let ok = EpisodeConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            EpisodeConfig {
                velocity_mps: 0.0,
                ..ok
            },
            EpisodeConfig { epoch_s: 0.0, ..ok },
            EpisodeConfig {
                rss_sample_interval_s: 3.0,
                ..ok
            },
            EpisodeConfig {
                smoothing_epochs: 0,
                ..ok
            },
            EpisodeConfig { timeout_s: 2.0, ..ok },
            EpisodeConfig {
                agent: AgentConfig {
                    epsilon: 2.0,
                    ..ok.agent
                },
                ..ok
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
            assert!(run_episode(&default_map(), &bad).is_err());
        }
    }

    #[test]
    fn timeout_bounds_the_step_count() {
        let map = default_map();
        let c = EpisodeConfig {
            epoch_s: 2.0,
            timeout_s: 4.0,
            ..EpisodeConfig::default()
        };
        let log = run_episode(&map, &c).unwrap();
        assert!(matches!(log.outcome, Outcome::TimedOut { .. }));
        assert!(log.steps.len() <= 2);
    }

    #[test]
    fn step_records_are_consistent() {
        for motion in [Motion::Strict, Motion::StopAtWall] {
            check_step_records(motion);
        }
    }

    fn check_step_records(motion: Motion) {
        let map = default_map();
        let c = EpisodeConfig {
            velocity_mps: 5.0,
            epoch_s: 1.0,
            rss_sample_interval_s: 5e-3,
            timeout_s: 400.0,
            motion,
            ..EpisodeConfig::default()
        };
        let log = run_episode(&map, &c).unwrap();
        assert_eq!(log.steps[0].reward, 0.0);
        assert_eq!(log.steps[0].pose, map.start());
        for (i, s) in log.steps.iter().enumerate() {
            assert_eq!(s.epoch_index, i as u64);
            assert_eq!(s.time_s, i as f64 * c.epoch_s);
            assert_eq!(s.state, quantize_state(s.smoothed_rss_dbm).unwrap());
            assert!(s.retried_actions <= 7);
            assert!(map.is_free_point(&s.pose));
        }
        // The action decided in epoch i is flown during epoch i + 1.
        for w in log.steps.windows(3) {
            let d = w[1].pose.distance_to(&w[2].pose);
            match (w[0].action, motion) {
                (Some(_), Motion::Strict) => assert!((d - 5.0).abs() < 1e-9, "moved {d}"),
                (Some(a), Motion::StopAtWall) => {
                    assert!(d >= map.cell_size_m() && d <= 5.0 + 1e-9, "moved {d}");
                    let end = target_of(&w[1].pose, a, d);
                    assert!(end.distance_to(&w[2].pose) < 1e-9, "not along heading {a}");
                }
                (None, _) => assert_eq!(d, 0.0),
            }
            assert!(is_segment_free(&map, &w[1].pose, &w[2].pose));
        }
        assert_eq!(log.steps[1].pose, map.start());
        if let Outcome::Converged { time_s, .. } = log.outcome {
            let last = log.steps.last().unwrap();
            assert_eq!(last.state, StateId::STRONGEST);
            assert_eq!(time_s, (last.epoch_index + 1) as f64 * c.epoch_s);
        }
    }

    #[test]
    fn boxed_in_uav_holds() {
        // 1.5 m steps cannot leave the 1 x 1 cell pocket around U.
        let map = parse_map("5 3 1.0\n#####\n#U#S#\n#...#\n").unwrap();
        let c = EpisodeConfig {
            velocity_mps: 1.5,
            epoch_s: 1.0,
            rss_sample_interval_s: 0.1,
            timeout_s: 5.0,
            channel: ChannelParams::new(-40.0, 2.4e9).unwrap(),
            ..EpisodeConfig::default()
        };
        let log = run_episode(&map, &c).unwrap();
        assert_eq!(log.steps.len(), 5);
        for s in &log.steps {
            assert_eq!(s.action, None);
            assert_eq!(s.retried_actions, 7);
            assert_eq!(s.pose, map.start());
        }
    }

    #[test]
    fn single_state_mode_runs() {
        let map = default_map();
        let c = EpisodeConfig {
            agent: AgentConfig {
                mode: AgentMode::SingleState,
                lr_schedule: LearningRateSchedule::Fixed { alpha: 1.0 },
                ..AgentConfig::default()
            },
            rss_sample_interval_s: 5e-3,
            timeout_s: 100.0,
            ..EpisodeConfig::default()
        };
        let log = run_episode(&map, &c).unwrap();
        assert!(!log.steps.is_empty());
        assert!(log.steps.iter().all(|s| s.alpha_used == 1.0));
    }

    #[test]
    fn sensor_matches_the_rss_formula() {
        // Oracle: per-sample rss_instant, then the public epoch average.
        // At 10 m/s the 5 m segment takes the whole 0.5 s epoch; at 20 m/s
        // it is done halfway and the UAV hovers at its end.
        let map = default_map();
        let params = ChannelParams::default();
        let fading = create_fading(5.0, &params, 77).unwrap();
        for (speed, arrive_at) in [(10.0, 50.0), (20.0, 25.0)] {
            let sensor = Sensor {
                fading: Some(fading.clone()),
                source: map.source(),
                intercept_mw: channel::dbm_to_mw(params.tx_power_dbm - 128.1),
                dt: 0.01,
                speed,
                n: 50,
                domain: AveragingDomain::Linear,
            };
            let (a, b) = (Pose::new(10.25, 20.25), Pose::new(10.25, 25.25));
            let t0 = 12.0;
            let got = sensor.epoch_average(t0, &a, &b);
            let oracle: Vec<RssSample> = (0..50)
                .map(|k| {
                    let t = t0 + k as f64 * 0.01;
                    let p = a.lerp(&b, (k as f64 / arrive_at).min(1.0));
                    let d = map.distance_to_source(&p);
                    RssSample {
                        time_s: t,
                        rss_dbm: channel::rss_instant(&params, d, &fading, t).unwrap(),
                    }
                })
                .collect();
            let want = epoch_average_rss(&oracle).unwrap();
            assert!((got - want).abs() < 1e-9, "speed {speed}: {got} vs {want}");
        }
    }
}

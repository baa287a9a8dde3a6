//! Seeded Monte Carlo sweeps and their reports.
//!
//! Every episode seed is a hash of the base seed, the cell's grid indices and
//! the episode index, so a sweep result depends only on its inputs and not
//! on how episodes are scheduled across worker threads.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::agent::{AgentMode, LearningRateSchedule};
use crate::sim::{run_episode_outcome, AveragingDomain, EpisodeConfig, SimError};
use crate::world::OccupancyMap;

pub const BOOTSTRAP_RESAMPLES: usize = 2000;

pub const CSV_HEADER: [&str; 14] = [
    "T_S_s",
    "velocity_mps",
    "schedule",
    "epsilon",
    "mode",
    "n",
    "n_converged",
    "mean_s",
    "median_s",
    "p5_s",
    "p95_s",
    "ci95_lo_s",
    "ci95_hi_s",
    "timeout_rate",
];

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("cell T_S={epoch_s} v={velocity_mps} schedule={schedule} epsilon={epsilon} mode={mode}: {source}")]
    Episode {
        epoch_s: f64,
        velocity_mps: f64,
        schedule: LearningRateSchedule,
        epsilon: f64,
        mode: AgentMode,
        #[source]
        source: SimError,
    },
    #[error("derived episode seeds collide; change base_seed")]
    SeedCollision,
    #[error("could not start worker pool: {0}")]
    Pool(String),
    #[error("{path}:{line}: {reason}")]
    Config { path: String, line: usize, reason: String },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("csv row {row}: {reason}")]
    CsvData { row: usize, reason: String },
    #[error("{0}")]
    Plot(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parameter grid of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub epochs_s: Vec<f64>,
    pub velocities_mps: Vec<f64>,
    pub schedules: Vec<LearningRateSchedule>,
    pub epsilons: Vec<f64>,
    pub modes: Vec<AgentMode>,
    pub episodes_per_cell: usize,
    pub base_seed: u64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            epochs_s: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            velocities_mps: vec![2.0, 5.0, 10.0],
            schedules: vec![
                LearningRateSchedule::default(),
                LearningRateSchedule::Fixed { alpha: 1.0 },
            ],
            epsilons: vec![0.1],
            modes: vec![AgentMode::TenState, AgentMode::SingleState],
            episodes_per_cell: 200,
            base_seed: 2018,
        }
    }
}

impl SweepGrid {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: &str| Err(SweepError::InvalidGrid(m.to_string()));
        if self.epochs_s.is_empty()
            || self.velocities_mps.is_empty()
            || self.schedules.is_empty()
            || self.epsilons.is_empty()
            || self.modes.is_empty()
        {
            return bad("every grid axis needs at least one value");
        }
        if self.episodes_per_cell == 0 {
            return bad("episodes_per_cell must be >= 1");
        }
        Ok(())
    }

    /// Cells in lexicographic index order.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut out = Vec::new();
        for (it, &epoch_s) in self.epochs_s.iter().enumerate() {
            for (iv, &velocity_mps) in self.velocities_mps.iter().enumerate() {
                for (is, &schedule) in self.schedules.iter().enumerate() {
                    for (ie, &epsilon) in self.epsilons.iter().enumerate() {
                        for (im, &mode) in self.modes.iter().enumerate() {
                            out.push(CellKey {
                                index: [it, iv, is, ie, im],
                                epoch_s,
                                velocity_mps,
                                schedule,
                                epsilon,
                                mode,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Grid point and its indices along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellKey {
    pub index: [usize; 5],
    pub epoch_s: f64,
    pub velocity_mps: f64,
    pub schedule: LearningRateSchedule,
    pub epsilon: f64,
    pub mode: AgentMode,
}

/// Convergence statistics of one cell. Times are over converged episodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub epoch_s: f64,
    pub velocity_mps: f64,
    pub schedule: LearningRateSchedule,
    pub epsilon: f64,
    pub mode: AgentMode,
    pub n: usize,
    pub n_converged: usize,
    pub summary: Summary,
}

/// Order statistics and bootstrap interval; `None` when nothing converged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean_s: Option<f64>,
    pub median_s: Option<f64>,
    pub p5_s: Option<f64>,
    pub p95_s: Option<f64>,
    pub ci95_lo_s: Option<f64>,
    pub ci95_hi_s: Option<f64>,
    pub timeout_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub cells: Vec<CellStats>,
    /// Not part of any serialized output.
    pub total_wall_time_s: f64,
}

impl SweepResult {
    pub fn find(
        &self,
        epoch_s: f64,
        velocity_mps: f64,
        schedule: LearningRateSchedule,
        mode: AgentMode,
    ) -> Option<&CellStats> {
        self.cells.iter().find(|c| {
            c.epoch_s == epoch_s && c.velocity_mps == velocity_mps && c.schedule == schedule && c.mode == mode
        })
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x6a09_e667_f3bc_c908, |h, &w| mix(h ^ mix(w)))
}

/// Seed of episode `episode` in the cell with grid indices `index`.
pub fn episode_seed(base_seed: u64, index: [usize; 5], episode: usize) -> u64 {
    let [a, b, c, d, e] = index.map(|i| i as u64);
    hash_words(&[base_seed, a, b, c, d, e, episode as u64])
}

/// Seed for the bootstrap of one cell.
pub fn cell_seed(base_seed: u64, index: [usize; 5]) -> u64 {
    let [a, b, c, d, e] = index.map(|i| i as u64);
    hash_words(&[base_seed, a, b, c, d, e, u64::MAX])
}

/// Runs every cell of `grid`. `base` supplies all episode settings that are
/// not grid axes. `workers == 1` runs serially.
pub fn run_sweep(
    grid: &SweepGrid,
    map: &OccupancyMap,
    base: &EpisodeConfig,
    workers: usize,
) -> Result<SweepResult, SweepError> {
    grid.validate()?;
    let started = Instant::now();
    let cells = grid.cells();
    let per = grid.episodes_per_cell;

    let mut jobs = Vec::with_capacity(cells.len() * per);
    let mut seen = HashSet::with_capacity(cells.len() * per);
    for (ci, key) in cells.iter().enumerate() {
        for e in 0..per {
            let seed = episode_seed(grid.base_seed, key.index, e);
            if !seen.insert(seed) {
                return Err(SweepError::SeedCollision);
            }
            jobs.push((ci, seed));
        }
    }

    let run = |&(ci, seed): &(usize, u64)| {
        let key = &cells[ci];
        let config = EpisodeConfig {
            velocity_mps: key.velocity_mps,
            epoch_s: key.epoch_s,
            seed,
            agent: crate::agent::AgentConfig {
                epsilon: key.epsilon,
                lr_schedule: key.schedule,
                mode: key.mode,
                ..base.agent
            },
            ..*base
        };
        run_episode_outcome(map, &config).map_err(|source| SweepError::Episode {
            epoch_s: key.epoch_s,
            velocity_mps: key.velocity_mps,
            schedule: key.schedule,
            epsilon: key.epsilon,
            mode: key.mode,
            source,
        })
    };

    let outcomes: Vec<_> = if workers <= 1 {
        jobs.iter().map(run).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| SweepError::Pool(e.to_string()))?;
        pool.install(|| jobs.par_iter().map(run).collect::<Result<_, _>>())?
    };

    let stats = cells
        .iter()
        .enumerate()
        .map(|(ci, key)| {
            let chunk = &outcomes[ci * per..(ci + 1) * per];
            let times: Vec<f64> = chunk.iter().filter_map(|o| o.convergence_time_s()).collect();
            let timeouts = per - times.len();
            CellStats {
                epoch_s: key.epoch_s,
                velocity_mps: key.velocity_mps,
                schedule: key.schedule,
                epsilon: key.epsilon,
                mode: key.mode,
                n: per,
                n_converged: times.len(),
                summary: summarize(&times, timeouts, cell_seed(grid.base_seed, key.index)),
            }
        })
        .collect();

    Ok(SweepResult {
        grid: grid.clone(),
        cells: stats,
        total_wall_time_s: started.elapsed().as_secs_f64(),
    })
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 1].
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Statistics over converged times plus the censoring rate. The 95% interval
/// is a percentile bootstrap of the mean with [`BOOTSTRAP_RESAMPLES`] draws.
pub fn summarize(samples: &[f64], n_timeouts: usize, seed: u64) -> Summary {
    let total = samples.len() + n_timeouts;
    let timeout_rate = if total == 0 {
        1.0
    } else {
        n_timeouts as f64 / total as f64
    };
    if samples.is_empty() {
        return Summary {
            mean_s: None,
            median_s: None,
            p5_s: None,
            p95_s: None,
            ci95_lo_s: None,
            ci95_hi_s: None,
            timeout_rate,
        };
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| (0..n).map(|_| sorted[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let lo = percentile(&means, 0.025).min(mean);
    let hi = percentile(&means, 0.975).max(mean);

    Summary {
        mean_s: Some(mean),
        median_s: Some(percentile(&sorted, 0.5)),
        p5_s: Some(percentile(&sorted, 0.05)),
        p95_s: Some(percentile(&sorted, 0.95)),
        ci95_lo_s: Some(lo),
        ci95_hi_s: Some(hi),
        timeout_rate,
    }
}

/// `%g`-style formatting with six significant digits.
pub fn fmt_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    // Rounding can carry into the next decade (999999.5 -> 1e+06).
    let rounded: f64 = format!("{:.5e}", v).parse().expect("valid float");
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) {
        exp + 1
    } else {
        exp
    };
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        let s = format!("{:.5e}", v);
        let (mant, e) = s.split_once('e').expect("exponent");
        let e: i32 = e.parse().expect("exponent digits");
        format!(
            "{}e{}{:02}",
            trim_zeros(mant.to_string()),
            if e < 0 { '-' } else { '+' },
            e.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), fmt_sig6)
}

fn sorted_cells(cells: &[CellStats], grid: Option<&SweepGrid>) -> Vec<CellStats> {
    let mut out = cells.to_vec();
    if let Some(g) = grid {
        let pos = |xs: &[f64], v: f64| xs.iter().position(|x| *x == v).unwrap_or(usize::MAX);
        out.sort_by_key(|c| {
            (
                pos(&g.epochs_s, c.epoch_s),
                pos(&g.velocities_mps, c.velocity_mps),
                g.schedules.iter().position(|s| *s == c.schedule).unwrap_or(usize::MAX),
                pos(&g.epsilons, c.epsilon),
                g.modes.iter().position(|m| *m == c.mode).unwrap_or(usize::MAX),
            )
        });
    }
    out
}

/// Writes the result table. Rows follow grid index order.
pub fn write_csv<W: Write>(result: &SweepResult, sink: W) -> Result<(), SweepError> {
    write_cells_csv(&sorted_cells(&result.cells, Some(&result.grid)), sink)
}

fn write_cells_csv<W: Write>(cells: &[CellStats], sink: W) -> Result<(), SweepError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    w.write_record(CSV_HEADER)?;
    for c in cells {
        let s = &c.summary;
        w.write_record([
            fmt_sig6(c.epoch_s),
            fmt_sig6(c.velocity_mps),
            c.schedule.to_string(),
            fmt_sig6(c.epsilon),
            c.mode.to_string(),
            c.n.to_string(),
            c.n_converged.to_string(),
            opt(s.mean_s),
            opt(s.median_s),
            opt(s.p5_s),
            opt(s.p95_s),
            opt(s.ci95_lo_s),
            opt(s.ci95_hi_s),
            fmt_sig6(s.timeout_rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_csv`].
pub fn read_csv<R: Read>(source: R) -> Result<Vec<CellStats>, SweepError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(source);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(SweepError::CsvData {
            row: 1,
            reason: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let bad = |reason: String| SweepError::CsvData { row, reason };
        let num = |k: usize| -> Result<f64, SweepError> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| bad(format!("{} = `{}` is not a number", CSV_HEADER[k], &rec[k])))
        };
        let maybe = |k: usize| -> Result<Option<f64>, SweepError> {
            if &rec[k] == "NA" {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        let count = |k: usize| -> Result<usize, SweepError> {
            rec[k]
                .parse::<usize>()
                .map_err(|_| bad(format!("{} = `{}` is not a count", CSV_HEADER[k], &rec[k])))
        };
        out.push(CellStats {
            epoch_s: num(0)?,
            velocity_mps: num(1)?,
            schedule: rec[2].parse().map_err(bad)?,
            epsilon: num(3)?,
            mode: rec[4].parse().map_err(bad)?,
            n: count(5)?,
            n_converged: count(6)?,
            summary: Summary {
                mean_s: maybe(7)?,
                median_s: maybe(8)?,
                p5_s: maybe(9)?,
                p95_s: maybe(10)?,
                ci95_lo_s: maybe(11)?,
                ci95_hi_s: maybe(12)?,
                timeout_rate: num(13)?,
            },
        });
    }
    Ok(out)
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;
const LEGEND_H: f64 = 28.0;
const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];

fn panel_title(schedule: &LearningRateSchedule, mode: AgentMode, epsilon: Option<f64>) -> String {
    let base = match (mode, schedule) {
        (AgentMode::SingleState, _) => format!("single-state, {schedule}"),
        (AgentMode::TenState, LearningRateSchedule::Varying { .. }) => format!("Q-learning, {schedule}"),
        (AgentMode::TenState, LearningRateSchedule::Fixed { .. }) => format!("Q-learning, {schedule}"),
    };
    match epsilon {
        Some(e) => format!("{base}, eps={}", fmt_sig6(e)),
        None => base,
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the result as an SVG document: one panel per (schedule, mode)
/// pair (and epsilon, when several were swept), mean convergence time
/// against T_S with 95% whiskers, one line per velocity.
pub fn emit_plot<W: Write>(result: &SweepResult, sink: W) -> Result<(), SweepError> {
    emit_plot_cells(&sorted_cells(&result.cells, Some(&result.grid)), sink)
}

/// [`emit_plot`] for cells read back from CSV.
pub fn emit_plot_cells<W: Write>(cells: &[CellStats], mut sink: W) -> Result<(), SweepError> {
    let mut epochs: Vec<f64> = cells.iter().map(|c| c.epoch_s).collect();
    epochs.sort_by(f64::total_cmp);
    epochs.dedup();
    if epochs.len() < 2 {
        return Err(SweepError::Plot(
            "plotting needs at least two T_S values; write CSV output instead".into(),
        ));
    }
    let mut velocities: Vec<f64> = cells.iter().map(|c| c.velocity_mps).collect();
    velocities.sort_by(f64::total_cmp);
    velocities.dedup();
    let mut eps: Vec<f64> = cells.iter().map(|c| c.epsilon).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let multi_eps = eps.len() > 1;

    // Panels keyed in first-appearance order.
    let mut panels: Vec<(LearningRateSchedule, AgentMode, Option<f64>)> = Vec::new();
    for c in cells {
        let key = (c.schedule, c.mode, multi_eps.then_some(c.epsilon));
        if !panels.contains(&key) {
            panels.push(key);
        }
    }

    let y_max = cells
        .iter()
        .filter_map(|c| c.summary.ci95_hi_s.or(c.summary.mean_s))
        .fold(0.0f64, f64::max);
    let y_max = nice_ceiling(if y_max > 0.0 { y_max } else { 1.0 });
    let (x_min, x_max) = (epochs[0], epochs[epochs.len() - 1]);
    let log_x = x_min > 0.0 && x_max / x_min >= 8.0;
    let xf = |x: f64| -> f64 {
        let t = if log_x {
            (x / x_min).ln() / (x_max / x_min).ln()
        } else {
            (x - x_min) / (x_max - x_min)
        };
        MARGIN_L + t * (PANEL_W - MARGIN_L - MARGIN_R)
    };
    let yf = |y: f64| -> f64 { PANEL_H - MARGIN_B - (y / y_max) * (PANEL_H - MARGIN_T - MARGIN_B) };

    let width = PANEL_W * panels.len() as f64;
    let height = PANEL_H + LEGEND_H;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#,
        w = width,
        h = height
    );
    let _ = writeln!(svg, r#"<rect width="{width}" height="{height}" fill="white"/>"#);

    for (pi, (schedule, mode, e)) in panels.iter().enumerate() {
        let ox = pi as f64 * PANEL_W;
        let _ = writeln!(svg, r#"<g transform="translate({ox},0)">"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="18" text-anchor="middle" font-size="13">({}) {}</text>"#,
            PANEL_W / 2.0,
            (b'a' + pi as u8) as char,
            xml_escape(&panel_title(schedule, *mode, *e))
        );
        // Axes.
        let (x0, x1) = (MARGIN_L, PANEL_W - MARGIN_R);
        let (y0, y1) = (PANEL_H - MARGIN_B, MARGIN_T);
        let _ = writeln!(
            svg,
            r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" fill="none" stroke="black"/>"#
        );
        for &t in &epochs {
            let x = xf(t);
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                y0 + 4.0,
                y0 + 16.0,
                fmt_sig6(t)
            );
        }
        for k in 0..=4 {
            let v = y_max * k as f64 / 4.0;
            let y = yf(v);
            let _ = writeln!(
                svg,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                x0 - 4.0,
                x0 - 6.0,
                y + 4.0,
                fmt_sig6(v)
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">sampling duration T_S (s)</text>"#,
            (x0 + x1) / 2.0,
            PANEL_H - 12.0
        );
        let _ = writeln!(
            svg,
            r#"<text transform="translate(14,{:.1}) rotate(-90)" text-anchor="middle">mean convergence time (s)</text>"#,
            (y0 + y1) / 2.0
        );

        for (vi, &v) in velocities.iter().enumerate() {
            let color = COLORS[vi % COLORS.len()];
            let mut series: Vec<&CellStats> = cells
                .iter()
                .filter(|c| {
                    c.schedule == *schedule
                        && c.mode == *mode
                        && c.velocity_mps == v
                        && e.is_none_or(|e| c.epsilon == e)
                })
                .collect();
            series.sort_by(|a, b| a.epoch_s.total_cmp(&b.epoch_s));
            let points: Vec<String> = series
                .iter()
                .filter_map(|c| c.summary.mean_s.map(|m| format!("{:.2},{:.2}", xf(c.epoch_s), yf(m))))
                .collect();
            if points.is_empty() {
                continue;
            }
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                points.join(" ")
            );
            for c in &series {
                let s = &c.summary;
                if let (Some(m), Some(lo), Some(hi)) = (s.mean_s, s.ci95_lo_s, s.ci95_hi_s) {
                    let x = xf(c.epoch_s);
                    let _ = writeln!(
                        svg,
                        r#"<line class="whisker" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                        yf(lo),
                        yf(hi),
                        yf(m)
                    );
                }
            }
        }
        let _ = writeln!(svg, "</g>");
    }

    // Legend.
    let ly = PANEL_H + LEGEND_H / 2.0;
    for (vi, &v) in velocities.iter().enumerate() {
        let lx = 20.0 + vi as f64 * 110.0;
        let color = COLORS[vi % COLORS.len()];
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">v = {} m/s</text>"#,
            lx + 24.0,
            lx + 30.0,
            ly + 4.0,
            fmt_sig6(v)
        );
    }
    svg.push_str("</svg>\n");
    sink.write_all(svg.as_bytes())?;
    Ok(())
}

fn nice_ceiling(v: f64) -> f64 {
    let mag = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 2.5, 5.0, 10.0] {
        if m * mag >= v {
            return m * mag;
        }
    }
    10.0 * mag
}

/// Sweep settings read from a `key = value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub grid: SweepGrid,
    pub base: EpisodeConfig,
    /// Map file, relative paths resolved against the config file directory.
    pub map: Option<PathBuf>,
}

/// Parses a sweep config file.
///
/// Grid keys are the [`SweepGrid`] field names with comma-separated list
/// values. Optional episode keys (`rss_sample_interval_s`,
/// `smoothing_epochs`, `timeout_s`, `gamma`, `tx_power_dbm`, `carrier_hz`,
/// `fading`, `averaging`, `motion`) and `map` override the defaults. Missing grid keys
/// take the default grid's values.
pub fn parse_sweep_config(text: &str, path: &Path) -> Result<SweepSpec, SweepError> {
    let mut grid = SweepGrid::default();
    let mut base = EpisodeConfig::default();
    let mut map = None;
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |reason: String| SweepError::Config {
            path: path.display().to_string(),
            line: line_no,
            reason,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(prev) = seen.insert(key.to_string(), line_no) {
            return Err(err(format!("duplicate key `{key}` (first on line {prev})")));
        }
        let list = || value.split(',').map(str::trim).filter(|s| !s.is_empty());
        let reals = || -> Result<Vec<f64>, SweepError> {
            let v: Vec<f64> = list()
                .map(|s| s.parse::<f64>().map_err(|_| err(format!("`{s}` is not a number"))))
                .collect::<Result<_, _>>()?;
            if v.is_empty() {
                return Err(err(format!("`{key}` needs at least one value")));
            }
            Ok(v)
        };
        let real = || -> Result<f64, SweepError> {
            value
                .parse::<f64>()
                .map_err(|_| err(format!("`{value}` is not a number")))
        };
        let int = || -> Result<u64, SweepError> {
            value
                .parse::<u64>()
                .map_err(|_| err(format!("`{value}` is not a non-negative integer")))
        };
        match key {
            "epochs_s" => grid.epochs_s = reals()?,
            "velocities_mps" => grid.velocities_mps = reals()?,
            "epsilons" => grid.epsilons = reals()?,
            "schedules" => {
                grid.schedules = list().map(|s| s.parse().map_err(err)).collect::<Result<_, _>>()?;
            }
            "modes" => grid.modes = list().map(|s| s.parse().map_err(err)).collect::<Result<_, _>>()?,
            "episodes_per_cell" => grid.episodes_per_cell = int()? as usize,
            "base_seed" => grid.base_seed = int()?,
            "rss_sample_interval_s" => base.rss_sample_interval_s = real()?,
            "smoothing_epochs" => base.smoothing_epochs = int()? as usize,
            "timeout_s" => base.timeout_s = real()?,
            "gamma" => base.agent.gamma = real()?,
            "tx_power_dbm" => base.channel.tx_power_dbm = real()?,
            "carrier_hz" => base.channel.carrier_hz = real()?,
            "fading" => {
                base.fading = value
                    .parse::<bool>()
                    .map_err(|_| err(format!("`{value}` is not true/false")))?
            }
            "averaging" => {
                base.averaging = match value {
                    "linear" => AveragingDomain::Linear,
                    "db" => AveragingDomain::Db,
                    _ => return Err(err(format!("`{value}` is not linear/db"))),
                }
            }
            "motion" => base.motion = value.parse().map_err(err)?,
            "map" => {
                let p = PathBuf::from(value);
                map = Some(match path.parent() {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p,
                });
            }
            _ => return Err(err(format!("unknown key `{key}`"))),
        }
    }
    grid.validate().map_err(|e| SweepError::Config {
        path: path.display().to_string(),
        line: 0,
        reason: e.to_string(),
    })?;
    Ok(SweepSpec { grid, base, map })
}

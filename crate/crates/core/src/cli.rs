//! `uavnav` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation or data error. Data
//! goes to stdout (or `--out` files), diagnostics to stderr, and nothing is
//! written to stdout when a command fails.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::agent::{AgentConfig, AgentMode, LearningRateSchedule};
use crate::channel::{create_fading, ChannelParams};
use crate::experiment::{emit_plot, emit_plot_cells, parse_sweep_config, read_csv, run_sweep, write_csv};
use crate::sim::{run_episode, EpisodeConfig, Motion};
use crate::world::{default_map, parse_map, OccupancyMap, DEFAULT_MAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "uavnav",
    version,
    about = "Q-learning UAV navigation toward a fading RF source"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a map file, then print its statistics.
    ValidateMap {
        #[arg(long)]
        map: PathBuf,
    },
    /// Run one episode and write its JSON-lines log.
    #[command(allow_negative_numbers = true)]
    Run(RunArgs),
    /// Run a parameter sweep and write the CSV table (and optionally SVG).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "out-csv")]
        out_csv: PathBuf,
        #[arg(long = "out-svg")]
        out_svg: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Dump a fading gain trace as CSV (`time_s,gain_db`).
    ChannelTrace {
        #[arg(long)]
        velocity: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        duration: f64,
        #[arg(long)]
        out: PathBuf,
        /// Sample spacing in seconds.
        #[arg(long, default_value_t = 1e-3)]
        interval: f64,
        #[arg(long = "carrier-hz", default_value_t = 2.4e9)]
        carrier_hz: f64,
    },
    /// Render an SVG plot from a sweep CSV.
    Plot {
        #[arg(long = "in-csv")]
        in_csv: PathBuf,
        #[arg(long = "out-svg")]
        out_svg: PathBuf,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Map file. `default.map` falls back to the bundled floor when no such
    /// file exists.
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    velocity: f64,
    /// Sampling duration T_S in seconds.
    #[arg(long)]
    epoch: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    /// `fixed:A` or `varying:LO:HI`.
    #[arg(long, default_value = "varying:0.2:0.9")]
    schedule: LearningRateSchedule,
    /// `tenstate` or `singlestate`.
    #[arg(long, default_value = "tenstate")]
    mode: AgentMode,
    /// Log destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "timeout", default_value_t = 3600.0)]
    timeout_s: f64,
    #[arg(long = "sample-interval", default_value_t = 1e-3)]
    sample_interval_s: f64,
    #[arg(long = "smoothing", default_value_t = 3)]
    smoothing_epochs: usize,
    #[arg(long = "tx-power-dbm", default_value_t = 0.0)]
    tx_power_dbm: f64,
    #[arg(long = "carrier-hz", default_value_t = 2.4e9)]
    carrier_hz: f64,
    /// Disable fading (0 dB gain).
    #[arg(long = "no-fading")]
    no_fading: bool,
    /// `stop-at-wall` (fly until a wall, then hover) or `strict` (reject any
    /// heading whose full segment is not clear).
    #[arg(long, default_value = "stop-at-wall")]
    motion: Motion,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Data(e.to_string())
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DATA
        }
    }
}

fn load_map(path: &Path) -> Result<OccupancyMap, Failure> {
    if !path.exists() && path.as_os_str() == "default.map" {
        return Ok(default_map());
    }
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    parse_map(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to `path`, or to stdout when `path` is `-`.
fn emit(path: &Path, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    if path.as_os_str() == "-" {
        stdout.write_all(bytes)?;
        return Ok(());
    }
    fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::ValidateMap { map } => {
            let m = load_map(&map)?;
            let (s, t) = (m.start(), m.source());
            let report = format!(
                "map: {}\nextent: {} m x {} m ({} x {} cells of {} m)\nfree cells: {}\nstart: ({}, {})\nsource: ({}, {})\nstraight-line distance: {:.2} m\nconnectivity: OK\n",
                map.display(),
                m.width_m(),
                m.height_m(),
                m.width_cells(),
                m.height_cells(),
                m.cell_size_m(),
                m.free_cells(),
                s.x_m,
                s.y_m,
                t.x_m,
                t.y_m,
                s.distance_to(&t),
            );
            stdout.write_all(report.as_bytes())?;
        }
        Command::Run(args) => {
            let map = load_map(&args.map)?;
            let config = EpisodeConfig {
                velocity_mps: args.velocity,
                epoch_s: args.epoch,
                rss_sample_interval_s: args.sample_interval_s,
                smoothing_epochs: args.smoothing_epochs,
                agent: AgentConfig {
                    epsilon: args.epsilon,
                    gamma: args.gamma,
                    lr_schedule: args.schedule,
                    mode: args.mode,
                },
                channel: ChannelParams {
                    tx_power_dbm: args.tx_power_dbm,
                    carrier_hz: args.carrier_hz,
                },
                seed: args.seed,
                timeout_s: args.timeout_s,
                fading: !args.no_fading,
                motion: args.motion,
                ..EpisodeConfig::default()
            };
            let log = run_episode(&map, &config)?;
            let body = log.to_jsonl(&map);
            match &args.out {
                Some(path) => emit(path, body.as_bytes(), stdout)?,
                None => stdout.write_all(body.as_bytes())?,
            }
            let _ = writeln!(stderr, "{} epochs, {:?}", log.steps.len(), log.outcome);
        }
        Command::Sweep {
            config,
            out_csv,
            out_svg,
            workers,
        } => {
            if workers == 0 {
                return Err(Failure::Usage("--workers must be at least 1".into()));
            }
            let text = fs::read_to_string(&config).map_err(|e| Failure::Data(format!("{}: {e}", config.display())))?;
            let spec = parse_sweep_config(&text, &config)?;
            let map = match &spec.map {
                Some(p) => load_map(p)?,
                None => parse_map(DEFAULT_MAP)?,
            };
            let result = run_sweep(&spec.grid, &map, &spec.base, workers)?;
            let mut csv = Vec::new();
            write_csv(&result, &mut csv)?;
            let svg = match &out_svg {
                Some(_) => {
                    let mut svg = Vec::new();
                    emit_plot(&result, &mut svg)?;
                    Some(svg)
                }
                None => None,
            };
            emit(&out_csv, &csv, stdout)?;
            if let (Some(path), Some(svg)) = (&out_svg, svg) {
                emit(path, &svg, stdout)?;
            }
            let _ = writeln!(
                stderr,
                "{} cells x {} episodes in {:.1} s",
                result.cells.len(),
                spec.grid.episodes_per_cell,
                result.total_wall_time_s
            );
        }
        Command::ChannelTrace {
            velocity,
            seed,
            duration,
            out,
            interval,
            carrier_hz,
        } => {
            if !(duration.is_finite() && duration > 0.0) {
                return Err(Failure::Usage("--duration must be > 0".into()));
            }
            if !(interval.is_finite() && interval > 0.0) {
                return Err(Failure::Usage("--interval must be > 0".into()));
            }
            let params = ChannelParams::new(0.0, carrier_hz)?;
            let fading = create_fading(velocity, &params, seed)?;
            let n = ((duration / interval) * (1.0 + 1e-12)).floor() as usize;
            let mut body = String::with_capacity(24 * (n + 1));
            body.push_str("time_s,gain_db\n");
            for k in 0..n {
                let t = k as f64 * interval;
                body.push_str(&format!("{},{}\n", t, 10.0 * fading.power_gain(t).log10()));
            }
            emit(&out, body.as_bytes(), stdout)?;
        }
        Command::Plot { in_csv, out_svg } => {
            let file = fs::File::open(&in_csv).map_err(|e| Failure::Data(format!("{}: {e}", in_csv.display())))?;
            let cells = read_csv(io::BufReader::new(file))?;
            let mut svg = Vec::new();
            emit_plot_cells(&cells, &mut svg)?;
            emit(&out_svg, &svg, stdout)?;
        }
    }
    Ok(())
}

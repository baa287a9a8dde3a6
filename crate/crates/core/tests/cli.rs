//! End-to-end checks of the `uavnav` binary.

use std::path::Path;
use std::process::{Command, Output};

fn uavnav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uavnav")).args(args).output().unwrap()
}

const ROOM: &str = "12 12 0.5\n\
............\n\
..........S.\n\
............\n\
............\n\
............\n\
............\n\
............\n\
............\n\
............\n\
............\n\
.U..........\n\
............\n";

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn run_is_deterministic_and_logs_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let map = write(dir.path(), "room.map", ROOM);
    let args = [
        "run",
        "--map",
        &map,
        "--seed",
        "5",
        "--velocity",
        "2",
        "--epoch",
        "0.5",
        "--tx-power-dbm",
        "-30",
        "--timeout",
        "200",
        "--sample-interval",
        "0.01",
    ];
    let a = uavnav(&args);
    let b = uavnav(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);

    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["record"], "config");
    assert_eq!(lines[0]["seed"], 5);
    assert_eq!(lines.last().unwrap()["record"], "outcome");
    assert_eq!(
        lines.last().unwrap()["steps"].as_u64().unwrap() as usize,
        lines.len() - 2
    );
    for (i, step) in lines[1..lines.len() - 1].iter().enumerate() {
        assert_eq!(step["epoch_index"].as_u64().unwrap() as usize, i);
    }

    let other = uavnav(&[&args[..4], &["6"], &args[5..]].concat());
    assert_ne!(other.stdout, text.as_bytes(), "a different seed should change the log");
}

#[test]
fn failures_write_nothing_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let bad_map = write(dir.path(), "bad.map", "3 3 1.0\nU..\n###\n..S\n");
    for (args, code) in [
        (
            vec![
                "run",
                "--map",
                bad_map.as_str(),
                "--seed",
                "1",
                "--velocity",
                "2",
                "--epoch",
                "1",
            ],
            2,
        ),
        (vec!["validate-map", "--map", bad_map.as_str()], 2),
        (vec!["validate-map", "--map", "/nonexistent/floor.map"], 2),
        (
            vec![
                "run",
                "--map",
                "default.map",
                "--seed",
                "1",
                "--velocity",
                "-2",
                "--epoch",
                "1",
            ],
            2,
        ),
        (
            vec![
                "run",
                "--map",
                "default.map",
                "--seed",
                "1",
                "--velocity",
                "2",
                "--epoch",
                "1",
                "--motion",
                "hop",
            ],
            1,
        ),
        (vec!["run", "--seed", "1"], 1),
        (vec!["frobnicate"], 1),
    ] {
        let out = uavnav(&args);
        assert_eq!(
            out.status.code(),
            Some(code),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty(), "{args:?} wrote to stdout");
        assert!(!out.stderr.is_empty(), "{args:?} gave no diagnostic");
    }
    let wall = uavnav(&["validate-map", "--map", &bad_map]);
    assert!(String::from_utf8_lossy(&wall.stderr).contains("not reachable"));
}

#[test]
fn validate_map_reports_the_bundled_floor() {
    let out = uavnav(&["validate-map", "--map", "default.map"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("75 m x 120 m"), "{text}");
    assert!(text.contains("connectivity: OK"));
}

#[test]
fn channel_trace_csv() {
    let out = uavnav(&[
        "channel-trace",
        "--velocity",
        "5",
        "--seed",
        "3",
        "--duration",
        "0.1",
        "--out",
        "-",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("time_s,gain_db"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, g) = l.split_once(',').unwrap();
            (t.parse().unwrap(), g.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 100);
    assert_eq!(rows[0].0, 0.0);
    assert!(rows.iter().all(|(_, g)| g.is_finite()));
}

#[test]
fn sweep_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "room.map", ROOM);
    let cfg = write(
        dir.path(),
        "grid.cfg",
        "# three velocities, two sampling durations\n\
         epochs_s = 0.5, 1\nvelocities_mps = 1, 2, 4\nschedules = varying:0.2:0.9\n\
         epsilons = 0.1\nmodes = tenstate\nepisodes_per_cell = 3\nbase_seed = 11\n\
         tx_power_dbm = -30\ntimeout_s = 300\nrss_sample_interval_s = 0.01\nmap = room.map\n",
    );
    let csv = dir.path().join("out.csv");
    let svg = dir.path().join("out.svg");
    let out = uavnav(&[
        "sweep",
        "--config",
        &cfg,
        "--out-csv",
        csv.to_str().unwrap(),
        "--out-svg",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().count(), 1 + 6);
    assert!(table.starts_with("T_S_s,velocity_mps,"));
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(plot.matches("<polyline").count(), 3, "one line per velocity");

    // Re-plotting from the CSV gives the same picture.
    let svg2 = dir.path().join("again.svg");
    let out = uavnav(&[
        "plot",
        "--in-csv",
        csv.to_str().unwrap(),
        "--out-svg",
        svg2.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&svg2).unwrap(), plot);
}

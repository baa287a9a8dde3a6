//! Compiles and runs a small C program against the generated header and
//! the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "uavnav.h"

int main(void) {
    double pl = 0.0;
    if (uavnav_path_loss_db(100.0, &pl) != UAVNAV_STATUS_OK) return 1;
    if (pl < 90.4999 || pl > 90.5001) return 2;

    UavnavMap *map = NULL;
    if (uavnav_map_parse("3 1 1.0\nU.\n", &map) != UAVNAV_STATUS_MAP_INVALID) return 3;
    if (map != NULL || uavnav_last_error() == NULL) return 4;

    if (uavnav_map_default(&map) != UAVNAV_STATUS_OK) return 5;
    UavnavEpisodeConfig cfg;
    uavnav_episode_config_default(&cfg);
    cfg.rss_sample_interval_s = 0.01;
    cfg.timeout_s = 20.0;
    UavnavEpisode *ep = NULL;
    if (uavnav_run_episode(map, &cfg, &ep) != UAVNAV_STATUS_OK) return 6;
    size_t steps = 0;
    uavnav_episode_step_count(ep, &steps);
    printf("steps=%zu\n", steps);
    uavnav_episode_free(ep);
    uavnav_map_free(map);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps/<name>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn find_compiler() -> Option<String> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .map(String::from)
}

#[test]
fn c_program_links_and_runs() {
    let Some(cc) = find_compiler() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let lib = target_dir().join("libuavnav_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("steps="));
}

//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use thickwalk::io::write_frame;
use thickwalk::{Vec3, Walk};

/// Equilateral walk inscribed in the curve `f` over `[t0, t1]`: each vertex is
/// the next curve point at unit distance from the previous one.
pub fn equilateral_along(f: impl Fn(f64) -> Vec3, t0: f64, t1: f64) -> Walk {
    let origin = f(t0);
    let mut pts = vec![Vec3::ZERO];
    let (mut t, mut cur) = (t0, origin);
    let dt = (t1 - t0) * 1e-4;
    loop {
        let mut hi = t;
        while hi < t1 && f(hi).distance(cur) < 1.0 {
            hi += dt;
        }
        if hi >= t1 {
            break;
        }
        let mut lo = hi - dt;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid).distance(cur) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // Snap to exact unit length along the chord.
        let next = cur + (f(hi) - cur).normalized().unwrap();
        pts.push(next - origin);
        cur = next;
        t = hi;
    }
    Walk::new(pts).unwrap()
}

/// Writes `walks` as one frame file at `dir/samples/<name>`.
pub fn write_frames(dir: &Path, name: &str, walks: &[Walk], r: f64) -> PathBuf {
    let samples = dir.join("samples");
    fs::create_dir_all(&samples).unwrap();
    let path = samples.join(name);
    let mut buf = Vec::new();
    for (k, w) in walks.iter().enumerate() {
        write_frame(&mut buf, w, r, k as u64).unwrap();
    }
    fs::write(&path, buf).unwrap();
    path
}

pub fn thickwalk(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_thickwalk"));
    cmd.args(args).env_remove("THICKWALK_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

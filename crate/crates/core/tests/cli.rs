//! End-to-end checks of the campaign pipeline and the command-line tool.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use common::{code, equilateral_along, thickwalk, write_frames};
use thickwalk::campaign::{self, CampaignConfig, Manifest, MANIFEST_FILE};
use thickwalk::io::{frame_len, parse_walks_text};
use thickwalk::knots::benchmarks::trefoil_point;
use thickwalk::{Vec3, Walk};

fn tiny_config(dir: &Path) -> CampaignConfig {
    let mut c = CampaignConfig::default_grid();
    c.lengths = vec![50];
    c.radii = vec![0.0, 0.2];
    c.samples_per_cell = 100;
    c.chains_per_cell = 2;
    c.knot_closures = 10;
    c.seed = 11;
    c.output_dir = dir.to_path_buf();
    c
}

/// Every regular file under `dir`, keyed by path relative to it.
fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn tiny_campaign_manifest_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tiny_config(tmp.path());
    let summary = campaign::generate(&c, Some(1)).unwrap();
    assert_eq!(summary.chains.len(), 4);
    campaign::analyze(tmp.path(), tmp.path(), Some(1)).unwrap();
    campaign::knots(tmp.path(), tmp.path(), c.knot_closures, c.seed, None, Some(1)).unwrap();

    let text = fs::read_to_string(tmp.path().join(MANIFEST_FILE)).unwrap();
    let m = Manifest::parse(&text).unwrap();
    assert_eq!(Manifest::parse(&m.to_text()).unwrap(), m);
    for key in [
        "version",
        "rng",
        "seed",
        "generate.wall_clock_seconds",
        "config.lengths",
    ] {
        assert!(m.meta.contains_key(key), "manifest lacks {key}");
    }
    assert_eq!(m.meta["seed"], "11");
    assert!(m.verify(tmp.path()).is_empty());

    let stored = CampaignConfig::from_file(&tmp.path().join(campaign::CONFIG_FILE)).unwrap();
    assert_eq!(stored, c);
}

#[test]
fn manifest_lists_every_output_file() {
    let tmp = tempfile::tempdir().unwrap();
    let c = tiny_config(tmp.path());
    campaign::generate(&c, Some(1)).unwrap();
    campaign::analyze(tmp.path(), tmp.path(), Some(1)).unwrap();
    campaign::knots(tmp.path(), tmp.path(), c.knot_closures, c.seed, None, Some(1)).unwrap();
    campaign::table1(
        &CampaignConfig {
            acceptance_proposals: 200,
            ..c.clone()
        },
        tmp.path(),
        Some(1),
    )
    .unwrap();

    let m = Manifest::parse(&fs::read_to_string(tmp.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    let files = tree(tmp.path());
    for (rel, bytes) in &files {
        if rel == MANIFEST_FILE {
            continue;
        }
        let sum = m
            .files
            .get(rel)
            .unwrap_or_else(|| panic!("{rel} not in manifest"));
        assert_eq!(*sum, campaign::sha256_hex(bytes), "{rel}");
    }
    assert_eq!(m.files.len(), files.len() - 1);

    // Tampering is detected.
    let stats = tmp.path().join(campaign::CHAIN_STATS_FILE);
    fs::write(&stats, b"n,r\n").unwrap();
    assert_eq!(m.verify(tmp.path()), vec![campaign::CHAIN_STATS_FILE.to_string()]);
}

fn run_pipeline(dir: &Path, threads: &str, via_env: bool) {
    let cfg = dir.join("campaign.conf");
    fs::write(
        &cfg,
        "lengths = 40, 60\nradii = 0, 0.3\nsamples = 40\nchains_per_cell = 2\nclosures = 8\n",
    )
    .unwrap();
    let out = dir.join("out");
    let (out_s, cfg_s) = (out.to_str().unwrap(), cfg.to_str().unwrap());
    let env: Vec<(&str, &str)> = if via_env {
        vec![("THICKWALK_THREADS", threads)]
    } else {
        vec![]
    };
    let mut gen = vec!["generate", "--config", cfg_s, "--seed", "5", "--out", out_s];
    let mut ana = vec!["analyze", out_s];
    let mut kn = vec!["knots", out_s];
    if !via_env {
        for a in [&mut gen, &mut ana, &mut kn] {
            a.extend(["--threads", threads]);
        }
    }
    for args in [gen, ana, kn] {
        let o = thickwalk(&args, &env);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

/// Samples and CSV outputs; configuration and manifest name the output
/// directory and record wall-clock times, so they are compared separately.
fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    tree(&dir.join("out"))
        .into_iter()
        .filter(|(k, _)| k.ends_with(".bin") || k.ends_with(".csv"))
        .collect()
}

fn stable_manifest_files(dir: &Path) -> BTreeMap<String, String> {
    let m = Manifest::parse(&fs::read_to_string(dir.join("out").join(MANIFEST_FILE)).unwrap()).unwrap();
    m.files
        .into_iter()
        .filter(|(k, _)| k != campaign::CONFIG_FILE)
        .collect()
}

#[test]
fn pipeline_is_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run_pipeline(a.path(), "1", false);
    run_pipeline(b.path(), "1", true);
    run_pipeline(c.path(), "8", false);
    let (oa, ob, oc) = (outputs(a.path()), outputs(b.path()), outputs(c.path()));
    assert_eq!(oa.len(), 8 + 5, "{:?}", oa.keys().collect::<Vec<_>>());
    assert!(oa == ob, "repeat run differs");
    assert!(oa == oc, "1 vs 8 threads differ");
    assert_eq!(stable_manifest_files(a.path()), stable_manifest_files(c.path()));
}

#[test]
fn straight_walk_samples_give_exact_observables() {
    let tmp = tempfile::tempdir().unwrap();
    let w = Walk::straight(10).unwrap();
    write_frames(tmp.path(), "n00010_r0000_c0000.bin", &vec![w; 7], 0.0);
    let s = campaign::analyze(tmp.path(), tmp.path(), Some(1)).unwrap();
    assert_eq!(s.cells.len(), 1);
    let cell = &s.cells[0];
    assert_eq!(cell.rg2.count, 7);
    // Points 0..=n on a line: RG² = n(n+2)/12, R² = n².
    assert!((cell.rg2.mean() - 10.0).abs() < 1e-12);
    assert!((cell.r2.mean() - 100.0).abs() < 1e-12);
    assert!(cell.rg2.stderr().abs() < 1e-9);
    assert!(cell.acceptance_rate.is_nan());
    let csv = fs::read_to_string(tmp.path().join(campaign::OBSERVABLES_FILE)).unwrap();
    assert!(
        csv.lines().nth(1).unwrap().starts_with("10,0,7,10,0,100,0,nan"),
        "{csv}"
    );
}

#[test]
fn empty_sample_directory_is_an_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(campaign::analyze(tmp.path(), tmp.path(), Some(1)).is_err());
    fs::create_dir_all(tmp.path().join("samples")).unwrap();
    assert!(campaign::analyze(tmp.path(), tmp.path(), Some(1)).is_err());
    assert!(campaign::knots(tmp.path(), tmp.path(), 10, 1, None, Some(1)).is_err());
    let o = thickwalk(&["analyze", tmp.path().to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn planted_open_trefoils_are_all_knotted() {
    let tmp = tempfile::tempdir().unwrap();
    let knot = equilateral_along(|t| trefoil_point(t) * 4.0, 0.2, std::f64::consts::TAU - 0.2);
    assert!(knot.n() > 40);
    let line = Walk::straight(knot.n()).unwrap();
    let name_k = format!("n{:05}_r0000_c0000.bin", knot.n());
    write_frames(tmp.path(), &name_k, &vec![knot.clone(); 5], 0.0);
    let s = campaign::knots(tmp.path(), tmp.path(), 50, 3, None, Some(1)).unwrap();
    assert_eq!(s.cells[0].walks, 5);
    assert_eq!(s.cells[0].p_knot(), 1.0);
    assert!(s.walks.iter().all(|w| w.class.name() == "3_1"));

    let other = tempfile::tempdir().unwrap();
    write_frames(other.path(), &name_k, &vec![line; 5], 0.0);
    let s = campaign::knots(other.path(), other.path(), 50, 3, None, Some(1)).unwrap();
    assert_eq!(s.cells[0].p_knot(), 0.0);
}

#[test]
fn corrupt_frames_are_skipped_and_counted() {
    let tmp = tempfile::tempdir().unwrap();
    let w = Walk::straight(6).unwrap();
    let path = write_frames(tmp.path(), "n00006_r0000_c0000.bin", &vec![w; 3], 0.0);
    let mut bytes = fs::read(&path).unwrap();
    // Break the unit edge length of the middle frame's last vertex.
    let last_x = 2 * frame_len(6) - 24;
    bytes[last_x..last_x + 8].copy_from_slice(&9.5f64.to_le_bytes());
    // And append half a frame.
    bytes.extend_from_within(..30);
    fs::write(&path, bytes).unwrap();

    let s = campaign::analyze(tmp.path(), tmp.path(), Some(1)).unwrap();
    assert_eq!(s.cells[0].rg2.count, 2);
    assert_eq!(s.corrupt_frames, 2);
    let m = Manifest::parse(&fs::read_to_string(tmp.path().join(MANIFEST_FILE)).unwrap()).unwrap();
    assert_eq!(m.meta["analyze.corrupt_frames"], "2");

    let o = thickwalk(
        &[
            "export",
            tmp.path().to_str().unwrap(),
            "--out",
            tmp.path().join("w.txt").to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("skipped 2 corrupt frames"));
    let walks = parse_walks_text(&fs::read_to_string(tmp.path().join("w.txt")).unwrap()).unwrap();
    assert_eq!(walks.len(), 2);
    assert_eq!(walks[0].0.end(), Vec3::new(6.0, 0.0, 0.0));
}

#[test]
fn existing_samples_from_another_campaign_are_refused() {
    let tmp = tempfile::tempdir().unwrap();
    write_frames(
        tmp.path(),
        "n00099_r0000_c0000.bin",
        &[Walk::straight(99).unwrap()],
        0.0,
    );
    let err = campaign::generate(&tiny_config(tmp.path()), Some(1)).unwrap_err();
    assert!(err.to_string().contains("another campaign"), "{err}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(code(&thickwalk(&["--help"], &[])), 0);
    assert_eq!(code(&thickwalk(&["--version"], &[])), 0);
    assert_eq!(code(&thickwalk(&[], &[])), 1);
    assert_eq!(code(&thickwalk(&["frobnicate"], &[])), 1);
    assert_eq!(
        code(&thickwalk(&["generate", "--lengths", "ten", "--out", out], &[])),
        1
    );
    assert_eq!(
        code(&thickwalk(&["generate", "--radii", "-1", "--out", out], &[])),
        1
    );
    assert_eq!(
        code(&thickwalk(&["generate", "--lengths", "2", "--out", out], &[])),
        1
    );
    assert_eq!(
        code(&thickwalk(&["generate", "--threads", "x", "--out", out], &[])),
        1
    );
    assert_eq!(
        code(&thickwalk(
            &["generate", "--out", out],
            &[("THICKWALK_THREADS", "x")]
        )),
        1
    );
    let missing = tmp.path().join("missing.conf");
    assert_eq!(
        code(&thickwalk(
            &["generate", "--config", missing.to_str().unwrap()],
            &[]
        )),
        1
    );
    assert_eq!(
        code(&thickwalk(
            &["analyze", tmp.path().join("nowhere").to_str().unwrap()],
            &[]
        )),
        2
    );
    assert_eq!(
        code(&thickwalk(
            &[
                "export",
                tmp.path().join("nowhere.bin").to_str().unwrap(),
                "--out",
                out
            ],
            &[]
        )),
        2
    );

    assert!(
        !Path::new(out).exists(),
        "failed commands must not leave output behind"
    );
    let ok = thickwalk(
        &[
            "table1",
            "--lengths",
            "20",
            "--radii",
            "0,0.5",
            "--proposals",
            "100",
            "--out",
            out,
        ],
        &[("THICKWALK_THREADS", "1")],
    );
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("20,0,100.00"), "{stdout}");
}

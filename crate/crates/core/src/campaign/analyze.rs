//! Per-cell observables and per-radius scaling exponents from a sample directory.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::{
    by_cell, fmt_f64, radius_milli, read_frames, sample_files, with_pool, write_atomic, Manifest,
    CHAIN_STATS_FILE, EXPONENTS_FILE, OBSERVABLES_FILE,
};
use crate::error::{Error, Result};
use crate::stats::{fit_power_law, squared_end_to_end, squared_radius_of_gyration, Moments};

#[derive(Debug, Clone, PartialEq)]
pub struct CellObservables {
    pub n: usize,
    pub r: f64,
    pub rg2: Moments,
    pub r2: Moments,
    /// Pooled over the cell's chains; NaN without chain statistics.
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRow {
    pub r: f64,
    /// Slope of log mean RG² against log n.
    pub nu: f64,
    pub nu_stderr: f64,
    /// Slope of log acceptance rate against log n.
    pub alpha: f64,
    pub alpha_stderr: f64,
}

#[derive(Debug, Clone)]
pub struct AnalyzeSummary {
    pub cells: Vec<CellObservables>,
    pub exponents: Vec<ExponentRow>,
    pub corrupt_frames: u64,
}

/// Pooled acceptance per `(n, r_milli)` from `chain_stats.csv`, if present.
fn pooled_acceptance(dir: &Path) -> Result<BTreeMap<(usize, i64), (u64, u64)>> {
    let path = dir.join(CHAIN_STATS_FILE);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut out: BTreeMap<(usize, i64), (u64, u64)> = BTreeMap::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let parsed = (|| {
            Some((
                f.first()?.parse::<usize>().ok()?,
                f.get(1)?.parse::<f64>().ok()?,
                f.get(3)?.parse::<u64>().ok()?,
                f.get(4)?.parse::<u64>().ok()?,
            ))
        })();
        let (n, r, proposed, accepted) = parsed.ok_or_else(|| Error::Parse {
            line: k + 1,
            msg: format!("{CHAIN_STATS_FILE}: malformed row {line:?}"),
        })?;
        let e = out.entry((n, radius_milli(r))).or_default();
        e.0 += proposed;
        e.1 += accepted;
    }
    Ok(out)
}

fn fit_or_nan(points: &[(f64, f64)]) -> (f64, f64) {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(_, y)| y > 0.0 && y.is_finite())
        .collect();
    if usable.len() < 3 {
        return (f64::NAN, f64::NAN);
    }
    fit_power_law(&usable).map_or((f64::NAN, f64::NAN), |f| (f.exponent, f.exponent_stderr))
}

/// Exponent rows, one per radius in increasing order.
pub fn exponent_rows(cells: &[CellObservables]) -> Vec<ExponentRow> {
    let mut by_r: BTreeMap<i64, Vec<&CellObservables>> = BTreeMap::new();
    for c in cells {
        by_r.entry(radius_milli(c.r)).or_default().push(c);
    }
    by_r.into_values()
        .map(|cs| {
            let nu_pts: Vec<(f64, f64)> = cs.iter().map(|c| (c.n as f64, c.rg2.mean())).collect();
            let alpha_pts: Vec<(f64, f64)> = cs.iter().map(|c| (c.n as f64, c.acceptance_rate)).collect();
            let (nu, nu_stderr) = fit_or_nan(&nu_pts);
            let (alpha, alpha_stderr) = fit_or_nan(&alpha_pts);
            ExponentRow {
                r: cs[0].r,
                nu,
                nu_stderr,
                alpha,
                alpha_stderr,
            }
        })
        .collect()
}

/// Reads every frame file under `sample_dir/samples` and writes the
/// observables and exponents CSVs into `out_dir`.
pub fn analyze(sample_dir: &Path, out_dir: &Path, threads: Option<usize>) -> Result<AnalyzeSummary> {
    let start = Instant::now();
    let files = sample_files(sample_dir)?;
    let acceptance = pooled_acceptance(sample_dir)?;

    // Per-file moments, merged afterwards in file order so results do not
    // depend on the thread count.
    let per_file: Vec<Result<(Moments, Moments, u64)>> = with_pool(threads, || {
        files
            .par_iter()
            .map(|f| {
                let (frames, bad) = read_frames(&f.path)?;
                let mut rg2 = Moments::default();
                let mut r2 = Moments::default();
                for fr in &frames {
                    rg2.push(squared_radius_of_gyration(&fr.walk));
                    r2.push(squared_end_to_end(&fr.walk));
                }
                Ok((rg2, r2, bad))
            })
            .collect()
    })?;
    let per_file = per_file.into_iter().collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::new();
    let mut corrupt = 0;
    let mut offset = 0;
    for group in by_cell(&files) {
        let mut rg2 = Moments::default();
        let mut r2 = Moments::default();
        for (a, b, bad) in &per_file[offset..offset + group.len()] {
            rg2.merge(a);
            r2.merge(b);
            corrupt += bad;
        }
        offset += group.len();
        let head = &group[0];
        let acceptance_rate = acceptance
            .get(&(head.n, head.r_milli))
            .filter(|(p, _)| *p > 0)
            .map_or(f64::NAN, |&(p, a)| a as f64 / p as f64);
        cells.push(CellObservables {
            n: head.n,
            r: head.r(),
            rg2,
            r2,
            acceptance_rate,
        });
    }
    let exponents = exponent_rows(&cells);

    let mut obs = String::from("n,r,samples,mean_rg2,stderr_rg2,mean_r2,stderr_r2,acceptance_rate\n");
    for c in &cells {
        let _ = writeln!(
            obs,
            "{},{},{},{},{},{},{},{}",
            c.n,
            c.r,
            c.rg2.count,
            fmt_f64(c.rg2.mean()),
            fmt_f64(c.rg2.stderr()),
            fmt_f64(c.r2.mean()),
            fmt_f64(c.r2.stderr()),
            fmt_f64(c.acceptance_rate)
        );
    }
    let mut exp = String::from("r,nu,nu_stderr,alpha,alpha_stderr\n");
    for e in &exponents {
        let _ = writeln!(
            exp,
            "{},{},{},{},{}",
            e.r,
            fmt_f64(e.nu),
            fmt_f64(e.nu_stderr),
            fmt_f64(e.alpha),
            fmt_f64(e.alpha_stderr)
        );
    }
    write_atomic(out_dir, OBSERVABLES_FILE, obs.as_bytes())?;
    write_atomic(out_dir, EXPONENTS_FILE, exp.as_bytes())?;

    let mut manifest = Manifest::load_or_default(out_dir)?;
    manifest.set("version", env!("CARGO_PKG_VERSION"));
    manifest.set("analyze.corrupt_frames", corrupt);
    manifest.set(
        "analyze.wall_clock_seconds",
        format!("{:.3}", start.elapsed().as_secs_f64()),
    );
    manifest.record_file(out_dir, OBSERVABLES_FILE)?;
    manifest.record_file(out_dir, EXPONENTS_FILE)?;
    manifest.write(out_dir)?;

    Ok(AnalyzeSummary {
        cells,
        exponents,
        corrupt_frames: corrupt,
    })
}

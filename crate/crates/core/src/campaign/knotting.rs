//! Knot statistics of sampled walks: dominant class per walk and knot
//! probability per cell, with RG² split by knottedness.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::{
    by_cell, fmt_f64, read_frames, sample_files, with_pool, write_atomic, Manifest, KNOTS_FILE,
    KNOT_PROBABILITY_FILE,
};
use crate::error::Result;
use crate::geom::Walk;
use crate::knots::{dominance, knot_spectrum, DominanceLevel, KnotClass, CLOSURE_SPHERE_FACTOR};
use crate::sampler::{cell_stream, chain_rng};
use crate::stats::{squared_radius_of_gyration, wilson_interval, Moments};

/// z for 95% binomial intervals.
const Z95: f64 = 1.959_963_984_540_054;

/// Generator stream for the closures of sample `index` in cell `(n, r)`.
/// The top bit keeps these apart from the sampling streams.
pub fn knot_stream(n: usize, r: f64, index: u64) -> u64 {
    (1 << 63) | cell_stream(n, r, index)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkKnot {
    pub n: usize,
    pub r: f64,
    pub index: u64,
    /// Most frequent closure class.
    pub class: KnotClass,
    pub level: DominanceLevel,
    pub fraction: f64,
    /// Weak-dominance winner exists and is a nontrivial knot.
    pub knotted: bool,
    pub rg2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotCellSummary {
    pub n: usize,
    pub r: f64,
    pub walks: u64,
    pub knotted: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub rg2_knotted: Moments,
    pub rg2_unknotted: Moments,
}

impl KnotCellSummary {
    pub fn p_knot(&self) -> f64 {
        if self.walks == 0 {
            f64::NAN
        } else {
            self.knotted as f64 / self.walks as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct KnotsSummary {
    pub walks: Vec<WalkKnot>,
    pub cells: Vec<KnotCellSummary>,
    pub corrupt_frames: u64,
}

/// Classifies one walk from `closures` random sphere closures.
pub fn classify_walk(walk: &Walk, n: usize, r: f64, index: u64, closures: usize, seed: u64) -> WalkKnot {
    let mut rng = chain_rng(seed, knot_stream(n, r, index));
    let rg2 = squared_radius_of_gyration(walk);
    let verdict = knot_spectrum(walk.vertices(), closures, &mut rng).and_then(|s| dominance(&s));
    match verdict {
        Ok(v) => {
            let knotted = v.weak_winner().is_some_and(|w| !w.is_unknot() && !w.is_failed());
            WalkKnot {
                n,
                r,
                index,
                class: v.winner,
                level: v.level,
                fraction: v.fraction,
                knotted,
                rg2,
            }
        }
        Err(_) => WalkKnot {
            n,
            r,
            index,
            class: KnotClass::failed(),
            level: DominanceLevel::None,
            fraction: 0.0,
            knotted: false,
            rg2,
        },
    }
}

/// Classifies every sample with `n` in `lengths` (all when `None`) and writes
/// `knots.csv` and `knot_probability.csv` into `out_dir`.
pub fn knots(
    sample_dir: &Path,
    out_dir: &Path,
    closures: usize,
    seed: u64,
    lengths: Option<&[usize]>,
    threads: Option<usize>,
) -> Result<KnotsSummary> {
    let start = Instant::now();
    let files = sample_files(sample_dir)?;
    let mut walks = Vec::new();
    let mut cells = Vec::new();
    let mut corrupt = 0;
    for group in by_cell(&files) {
        let (n, r) = (group[0].n, group[0].r());
        if lengths.is_some_and(|ls| !ls.contains(&n)) {
            continue;
        }
        let mut frames = Vec::new();
        for f in group {
            let (fs, bad) = read_frames(&f.path)?;
            frames.extend(fs);
            corrupt += bad;
        }
        let classified: Vec<WalkKnot> = with_pool(threads, || {
            frames
                .par_iter()
                .map(|fr| classify_walk(&fr.walk, n, r, fr.index, closures, seed))
                .collect()
        })?;
        let mut cell = KnotCellSummary {
            n,
            r,
            walks: classified.len() as u64,
            knotted: 0,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            rg2_knotted: Moments::default(),
            rg2_unknotted: Moments::default(),
        };
        for w in &classified {
            if w.knotted {
                cell.knotted += 1;
                cell.rg2_knotted.push(w.rg2);
            } else {
                cell.rg2_unknotted.push(w.rg2);
            }
        }
        if cell.walks > 0 {
            (cell.ci_low, cell.ci_high) = wilson_interval(cell.knotted, cell.walks, Z95);
        }
        cells.push(cell);
        walks.extend(classified);
    }

    let mut per_walk = String::from("n,r,sample,knot,determinant,secondary,level,fraction,knotted,rg2\n");
    for w in &walks {
        let _ = writeln!(
            per_walk,
            "{},{},{},{},{},{},{},{},{},{}",
            w.n,
            w.r,
            w.index,
            w.class.name(),
            w.class.determinant(),
            w.class.secondary(),
            w.level,
            w.fraction,
            u8::from(w.knotted),
            w.rg2
        );
    }
    let mut prob = String::from(
        "n,r,walks,knotted,p_knot,ci_low,ci_high,mean_rg2_knotted,stderr_rg2_knotted,mean_rg2_unknotted,stderr_rg2_unknotted\n",
    );
    for c in &cells {
        let _ = writeln!(
            prob,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.n,
            c.r,
            c.walks,
            c.knotted,
            fmt_f64(c.p_knot()),
            fmt_f64(c.ci_low),
            fmt_f64(c.ci_high),
            fmt_f64(c.rg2_knotted.mean()),
            fmt_f64(c.rg2_knotted.stderr()),
            fmt_f64(c.rg2_unknotted.mean()),
            fmt_f64(c.rg2_unknotted.stderr())
        );
    }
    write_atomic(out_dir, KNOTS_FILE, per_walk.as_bytes())?;
    write_atomic(out_dir, KNOT_PROBABILITY_FILE, prob.as_bytes())?;

    let mut manifest = Manifest::load_or_default(out_dir)?;
    manifest.set("version", env!("CARGO_PKG_VERSION"));
    manifest.set("knots.seed", seed);
    manifest.set("knots.closures", closures);
    manifest.set("knots.closure_sphere_factor", CLOSURE_SPHERE_FACTOR);
    manifest.set("knots.dominance", "weak");
    manifest.set("knots.corrupt_frames", corrupt);
    manifest.set(
        "knots.wall_clock_seconds",
        format!("{:.3}", start.elapsed().as_secs_f64()),
    );
    manifest.record_file(out_dir, KNOTS_FILE)?;
    manifest.record_file(out_dir, KNOT_PROBABILITY_FILE)?;
    manifest.write(out_dir)?;

    Ok(KnotsSummary {
        walks,
        cells,
        corrupt_frames: corrupt,
    })
}

//! Acceptance table over a grid of lengths and radii, with the scaling
//! exponent α per radius.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::{fmt_f64, with_pool, write_atomic, CampaignConfig, Manifest, TABLE1_ALPHA_FILE, TABLE1_FILE};
use crate::error::Result;
use crate::sampler::{cell_stream, measure_acceptance_with, AcceptanceCell, ChainConfig, RNG_IDENTITY};
use crate::stats::{acceptance_scaling, AcceptancePoint, PowerLawFit};

#[derive(Debug, Clone)]
pub struct Table1Summary {
    pub cells: Vec<AcceptanceCell>,
    /// α fit per radius; radii with fewer than two lengths are absent.
    pub alpha: Vec<(f64, PowerLawFit)>,
}

/// Measures `config.acceptance_proposals` proposals per cell after burn-in and
/// writes `table1.csv` and `table1_alpha.csv` into `out_dir`.
pub fn table1(config: &CampaignConfig, out_dir: &Path, threads: Option<usize>) -> Result<Table1Summary> {
    config.validate()?;
    let start = Instant::now();
    let grid: Vec<(usize, f64)> = config
        .lengths
        .iter()
        .flat_map(|&n| config.radii.iter().map(move |&r| (n, r)))
        .collect();
    let measured: Vec<Result<AcceptanceCell>> = with_pool(threads, || {
        grid.par_iter()
            .map(|&(n, r)| {
                let mut c = ChainConfig::new(n, r, config.seed);
                c.stream = cell_stream(n, r, 0);
                c.move_mix = config.move_mix;
                c.max_plane_retries = config.max_plane_retries;
                if let Some(b) = config.burn_in {
                    c.burn_in = b;
                }
                let stats = measure_acceptance_with(c, config.acceptance_proposals)?;
                Ok(AcceptanceCell { n, r, stats })
            })
            .collect()
    })?;
    let cells = measured.into_iter().collect::<Result<Vec<_>>>()?;

    let points: Vec<AcceptancePoint> = cells
        .iter()
        .map(|c| AcceptancePoint {
            n: c.n,
            r: c.r,
            rate: c.percent(),
        })
        .collect();
    let multi_length = config.lengths.len() >= 2;
    let alpha = if multi_length {
        acceptance_scaling(&points)?
    } else {
        Vec::new()
    };

    let mut table = String::from("n,r,proposed,accepted,acceptance_percent\n");
    for c in &cells {
        let _ = writeln!(
            table,
            "{},{},{},{},{}",
            c.n,
            c.r,
            c.stats.proposed,
            c.stats.accepted,
            fmt_f64(c.percent())
        );
    }
    let mut fits = String::from("r,alpha,alpha_stderr,r_squared\n");
    for (r, f) in &alpha {
        let _ = writeln!(
            fits,
            "{},{},{},{}",
            r,
            fmt_f64(f.exponent),
            fmt_f64(f.exponent_stderr),
            fmt_f64(f.r_squared)
        );
    }
    write_atomic(out_dir, TABLE1_FILE, table.as_bytes())?;
    write_atomic(out_dir, TABLE1_ALPHA_FILE, fits.as_bytes())?;

    let mut manifest = Manifest::load_or_default(out_dir)?;
    manifest.set("version", env!("CARGO_PKG_VERSION"));
    manifest.set("rng", RNG_IDENTITY);
    manifest.set("table1.seed", config.seed);
    manifest.set("table1.proposals_per_cell", config.acceptance_proposals);
    manifest.set("table1.move_mix", config.move_mix);
    manifest.set("table1.max_plane_retries", config.max_plane_retries);
    manifest.set(
        "table1.wall_clock_seconds",
        format!("{:.3}", start.elapsed().as_secs_f64()),
    );
    manifest.record_file(out_dir, TABLE1_FILE)?;
    manifest.record_file(out_dir, TABLE1_ALPHA_FILE)?;
    manifest.write(out_dir)?;
    Ok(Table1Summary { cells, alpha })
}

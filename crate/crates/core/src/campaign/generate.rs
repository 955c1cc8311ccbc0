//! Parallel sample generation over `(cell, chain)` tasks.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::time::Instant;

use rayon::prelude::*;

use super::{
    fmt_f64, sample_file_name, with_pool, write_atomic, CampaignConfig, Manifest, CHAIN_STATS_FILE,
    CONFIG_FILE, SAMPLES_DIR,
};
use crate::error::{Error, Result};
use crate::io::write_frame;
use crate::sampler::{cell_stream, run_chain_with, ChainConfig, ChainStats, RNG_IDENTITY};
use crate::stats::{autocorrelation, squared_radius_of_gyration};

/// Result of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRun {
    pub n: usize,
    pub r: f64,
    pub chain: usize,
    pub stats: ChainStats,
    /// Lag-1 autocorrelation of RG² along the emitted samples.
    pub rg2_lag1: f64,
    pub file: String,
}

#[derive(Debug, Clone)]
pub struct GenerateSummary {
    pub chains: Vec<ChainRun>,
    pub wall_clock_seconds: f64,
}

fn chain_config(config: &CampaignConfig, n: usize, r: f64, chain: usize) -> ChainConfig {
    let mut c = ChainConfig::new(n, r, config.seed);
    c.stream = cell_stream(n, r, chain as u64);
    if let Some(b) = config.burn_in {
        c.burn_in = b;
    }
    if let Some(s) = config.stride {
        c.stride = s;
    }
    c.samples = config.samples_per_chain();
    c.move_mix = config.move_mix;
    c.max_plane_retries = config.max_plane_retries;
    c
}

fn run_task(config: &CampaignConfig, n: usize, r: f64, chain: usize) -> Result<ChainRun> {
    let rel = sample_file_name(n, r, chain);
    let path = config.output_dir.join(&rel);
    let tmp = path.with_extension("tmp");
    let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    let mut out = BufWriter::new(file);
    let first_index = (chain * config.samples_per_chain()) as u64;
    let mut rg2 = Vec::with_capacity(config.samples_per_chain());
    let mut write_err = None;
    let stats = run_chain_with(&chain_config(config, n, r, chain), |k, walk| {
        rg2.push(squared_radius_of_gyration(walk));
        if write_err.is_none() {
            write_err = write_frame(&mut out, walk, r, first_index + k as u64).err();
        }
    })?;
    if let Some(e) = write_err {
        return Err(Error::io(&tmp, e));
    }
    out.flush().map_err(|e| Error::io(&tmp, e))?;
    drop(out);
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    let rg2_lag1 = autocorrelation(&rg2, 1).unwrap_or(f64::NAN);
    Ok(ChainRun {
        n,
        r,
        chain,
        stats,
        rg2_lag1,
        file: rel,
    })
}

/// Refuses to mix these samples with frame files left by a different campaign.
fn check_stale(config: &CampaignConfig, planned: &BTreeSet<String>) -> Result<()> {
    let dir = config.output_dir.join(SAMPLES_DIR);
    let Ok(entries) = fs::read_dir(&dir) else {
        return Ok(());
    };
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".bin") && !planned.contains(&format!("{SAMPLES_DIR}/{name}")) {
            return Err(Error::Config(format!(
                "{} already holds samples from another campaign ({name}); choose a fresh output directory",
                config.output_dir.display()
            )));
        }
    }
    Ok(())
}

/// Runs every chain of the campaign and writes samples, chain statistics,
/// the resolved configuration and the manifest into `config.output_dir`.
pub fn generate(config: &CampaignConfig, threads: Option<usize>) -> Result<GenerateSummary> {
    config.validate()?;
    let start = Instant::now();
    let dir = &config.output_dir;
    let samples = dir.join(SAMPLES_DIR);
    fs::create_dir_all(&samples).map_err(|e| Error::io(&samples, e))?;

    let tasks: Vec<(usize, f64, usize)> = config
        .lengths
        .iter()
        .flat_map(|&n| {
            config
                .radii
                .iter()
                .flat_map(move |&r| (0..config.chains_per_cell).map(move |c| (n, r, c)))
        })
        .collect();
    let planned: BTreeSet<String> = tasks.iter().map(|&(n, r, c)| sample_file_name(n, r, c)).collect();
    check_stale(config, &planned)?;

    let runs: Vec<Result<ChainRun>> = with_pool(threads, || {
        tasks
            .par_iter()
            .map(|&(n, r, c)| run_task(config, n, r, c))
            .collect()
    })?;
    let chains = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let mut csv = String::from("n,r,chain,proposed,accepted,acceptance_rate,renormalizations,rg2_lag1\n");
    for c in &chains {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            c.n,
            c.r,
            c.chain,
            c.stats.proposed,
            c.stats.accepted,
            fmt_f64(c.stats.acceptance_rate()),
            c.stats.renormalizations,
            fmt_f64(c.rg2_lag1)
        );
    }
    write_atomic(dir, CHAIN_STATS_FILE, csv.as_bytes())?;
    write_atomic(dir, CONFIG_FILE, config.to_text().as_bytes())?;

    let wall = start.elapsed().as_secs_f64();
    let mut manifest = Manifest::load_or_default(dir)?;
    manifest.set("version", env!("CARGO_PKG_VERSION"));
    manifest.set("rng", RNG_IDENTITY);
    manifest.set("seed", config.seed);
    manifest.set("generate.wall_clock_seconds", format!("{wall:.3}"));
    manifest.set("generate.threads", rayon_threads(threads));
    for line in config.to_text().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            manifest.set(format!("config.{k}"), v);
        }
    }
    for rel in planned
        .iter()
        .map(String::as_str)
        .chain([CHAIN_STATS_FILE, CONFIG_FILE])
    {
        manifest.record_file(dir, rel)?;
    }
    manifest.write(dir)?;
    Ok(GenerateSummary {
        chains,
        wall_clock_seconds: wall,
    })
}

pub(crate) fn rayon_threads(threads: Option<usize>) -> String {
    threads.map_or_else(|| "auto".to_string(), |t| t.to_string())
}

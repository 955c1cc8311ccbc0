//! Sampling campaigns: configuration, parallel generation, analysis, knot
//! statistics and the acceptance table, all writing plain CSV and text files.
//!
//! An output directory holds `config.txt` (the resolved configuration),
//! `samples/` (one binary frame file per chain), CSV results and
//! `manifest.txt`, which lists every file with its SHA-256.

mod analyze;
mod export;
mod generate;
mod knotting;
mod manifest;
mod table1;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::{Frame, FrameRead, FrameReader};
use crate::knots::DEFAULT_CLOSURES;
use crate::sampler::{DEFAULT_MAX_PLANE_RETRIES, DEFAULT_MOVE_MIX};

pub use analyze::{analyze, AnalyzeSummary, CellObservables, ExponentRow};
pub use export::export_text;
pub use generate::{generate, GenerateSummary};
pub use knotting::{classify_walk, knot_stream, knots, KnotCellSummary, KnotsSummary, WalkKnot};
pub use manifest::{sha256_hex, Manifest};
pub use table1::{table1, Table1Summary};

pub const CONFIG_FILE: &str = "config.txt";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const SAMPLES_DIR: &str = "samples";
pub const CHAIN_STATS_FILE: &str = "chain_stats.csv";
pub const OBSERVABLES_FILE: &str = "observables.csv";
pub const EXPONENTS_FILE: &str = "exponents.csv";
pub const KNOTS_FILE: &str = "knots.csv";
pub const KNOT_PROBABILITY_FILE: &str = "knot_probability.csv";
pub const TABLE1_FILE: &str = "table1.csv";
pub const TABLE1_ALPHA_FILE: &str = "table1_alpha.csv";

/// Proposals per cell for the acceptance table.
pub const DEFAULT_ACCEPTANCE_PROPOSALS: u64 = 100_000;

/// Campaign settings; read from a flat `key = value` file, then overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub lengths: Vec<usize>,
    pub radii: Vec<f64>,
    pub samples_per_cell: usize,
    pub chains_per_cell: usize,
    pub seed: u64,
    pub move_mix: f64,
    /// `None` uses the chain default of `10 n`.
    pub burn_in: Option<u64>,
    /// `None` uses the chain default of `n`.
    pub stride: Option<u64>,
    pub max_plane_retries: usize,
    pub knot_closures: usize,
    /// Lengths to analyze for knotting; empty means every length.
    pub knot_lengths: Vec<usize>,
    pub acceptance_proposals: u64,
    pub output_dir: PathBuf,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self::default_grid()
    }
}

impl CampaignConfig {
    /// Lengths 100..=1000 by 100, radii 0..=1 by 0.1, 5000 samples per cell.
    pub fn default_grid() -> Self {
        CampaignConfig {
            lengths: (1..=10).map(|k| 100 * k).collect(),
            radii: (0..=10).map(|k| k as f64 / 10.0).collect(),
            samples_per_cell: 5000,
            chains_per_cell: 1,
            seed: 1,
            move_mix: DEFAULT_MOVE_MIX,
            burn_in: None,
            stride: None,
            max_plane_retries: DEFAULT_MAX_PLANE_RETRIES,
            knot_closures: DEFAULT_CLOSURES,
            knot_lengths: Vec::new(),
            acceptance_proposals: DEFAULT_ACCEPTANCE_PROPOSALS,
            output_dir: PathBuf::from("thickwalk-out"),
        }
    }

    /// Sets one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |e: &dyn std::fmt::Display| Error::Config(format!("{key} = {value:?}: {e}"));
        match key.trim() {
            "lengths" => self.lengths = parse_list(value).map_err(|e| bad(&e))?,
            "radii" => self.radii = parse_list(value).map_err(|e| bad(&e))?,
            "samples_per_cell" | "samples" => self.samples_per_cell = value.parse().map_err(|e| bad(&e))?,
            "chains_per_cell" => self.chains_per_cell = value.parse().map_err(|e| bad(&e))?,
            "seed" => self.seed = value.parse().map_err(|e| bad(&e))?,
            "move_mix" => self.move_mix = value.parse().map_err(|e| bad(&e))?,
            "burn_in" => self.burn_in = parse_optional(value).map_err(|e| bad(&e))?,
            "stride" => self.stride = parse_optional(value).map_err(|e| bad(&e))?,
            "max_plane_retries" => self.max_plane_retries = value.parse().map_err(|e| bad(&e))?,
            "knot_closures" | "closures" => self.knot_closures = value.parse().map_err(|e| bad(&e))?,
            "knot_lengths" => self.knot_lengths = parse_list(value).map_err(|e| bad(&e))?,
            "acceptance_proposals" => self.acceptance_proposals = value.parse().map_err(|e| bad(&e))?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: k + 1,
                msg: format!("expected `key = value`, got {line:?}"),
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut c = Self::default_grid();
        c.apply_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.radii.is_empty() {
            return Err(Error::Config("lengths and radii must be non-empty".into()));
        }
        if let Some(&n) = self.lengths.iter().find(|&&n| n < 3) {
            return Err(Error::Config(format!("lengths must be >= 3, got {n}")));
        }
        if let Some(&r) = self.radii.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(Error::Config(format!("radii must be finite and >= 0, got {r}")));
        }
        let mut milli: Vec<i64> = self.radii.iter().map(|r| radius_milli(*r)).collect();
        milli.sort_unstable();
        milli.dedup();
        if milli.len() != self.radii.len() {
            return Err(Error::Config("radii must differ at 0.001 resolution".into()));
        }
        let mut lengths = self.lengths.clone();
        lengths.sort_unstable();
        lengths.dedup();
        if lengths.len() != self.lengths.len() {
            return Err(Error::Config("lengths must be distinct".into()));
        }
        if self.chains_per_cell == 0 || self.samples_per_cell == 0 {
            return Err(Error::Config(
                "samples_per_cell and chains_per_cell must be positive".into(),
            ));
        }
        if !self.samples_per_cell.is_multiple_of(self.chains_per_cell) {
            return Err(Error::Config(format!(
                "samples_per_cell ({}) must be divisible by chains_per_cell ({})",
                self.samples_per_cell, self.chains_per_cell
            )));
        }
        if !(0.0..=1.0).contains(&self.move_mix) {
            return Err(Error::Config(format!(
                "move_mix must lie in [0, 1], got {}",
                self.move_mix
            )));
        }
        if self.stride == Some(0) {
            return Err(Error::Config("stride must be >= 1".into()));
        }
        if self.max_plane_retries == 0 {
            return Err(Error::Config("max_plane_retries must be >= 1".into()));
        }
        if self.knot_closures == 0 {
            return Err(Error::Config("knot_closures must be positive".into()));
        }
        if self.acceptance_proposals == 0 {
            return Err(Error::Config("acceptance_proposals must be positive".into()));
        }
        Ok(())
    }

    /// The configuration as `key = value` lines; `from_text` reads it back.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let opt = |v: Option<u64>| v.map_or_else(|| "default".to_string(), |x| x.to_string());
        let _ = writeln!(s, "lengths = {}", join(&self.lengths));
        let _ = writeln!(s, "radii = {}", join(&self.radii));
        let _ = writeln!(s, "samples_per_cell = {}", self.samples_per_cell);
        let _ = writeln!(s, "chains_per_cell = {}", self.chains_per_cell);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "move_mix = {}", self.move_mix);
        let _ = writeln!(s, "burn_in = {}", opt(self.burn_in));
        let _ = writeln!(s, "stride = {}", opt(self.stride));
        let _ = writeln!(s, "max_plane_retries = {}", self.max_plane_retries);
        let _ = writeln!(s, "knot_closures = {}", self.knot_closures);
        let _ = writeln!(s, "knot_lengths = {}", join(&self.knot_lengths));
        let _ = writeln!(s, "acceptance_proposals = {}", self.acceptance_proposals);
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        s
    }

    pub fn samples_per_chain(&self) -> usize {
        self.samples_per_cell / self.chains_per_cell
    }

    /// Lengths included in knot analysis.
    pub fn knot_length_set(&self) -> Vec<usize> {
        if self.knot_lengths.is_empty() {
            self.lengths.clone()
        } else {
            self.knot_lengths.clone()
        }
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_list<T: std::str::FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

fn parse_optional(s: &str) -> std::result::Result<Option<u64>, std::num::ParseIntError> {
    if s == "default" {
        Ok(None)
    } else {
        s.parse().map(Some)
    }
}

/// Radius in thousandths, the resolution of file names and RNG streams.
pub fn radius_milli(r: f64) -> i64 {
    (r * 1000.0).round() as i64
}

/// Relative path of the frame file for chain `chain` of cell `(n, r)`.
pub fn sample_file_name(n: usize, r: f64, chain: usize) -> String {
    format!("{SAMPLES_DIR}/n{n:05}_r{:04}_c{chain:04}.bin", radius_milli(r))
}

/// Parses `n00100_r0500_c0003.bin` into `(n, r_milli, chain)`.
pub fn parse_sample_file_name(name: &str) -> Option<(usize, i64, usize)> {
    let stem = name.strip_suffix(".bin")?;
    let mut parts = stem.split('_');
    let n = parts.next()?.strip_prefix('n')?.parse().ok()?;
    let r = parts.next()?.strip_prefix('r')?.parse().ok()?;
    let c = parts.next()?.strip_prefix('c')?.parse().ok()?;
    parts.next().is_none().then_some((n, r, c))
}

/// One chain's frame file found in a sample directory.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFile {
    pub n: usize,
    pub r_milli: i64,
    pub chain: usize,
    pub path: PathBuf,
}

impl SampleFile {
    pub fn r(&self) -> f64 {
        self.r_milli as f64 / 1000.0
    }
}

/// Frame files under `dir/samples`, ordered by `(n, r, chain)`.
pub fn sample_files(dir: &Path) -> Result<Vec<SampleFile>> {
    let samples = dir.join(SAMPLES_DIR);
    let entries = fs::read_dir(&samples).map_err(|e| Error::io(&samples, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(&samples, e))?;
        let name = entry.file_name();
        if let Some((n, r_milli, chain)) = name.to_str().and_then(parse_sample_file_name) {
            out.push(SampleFile {
                n,
                r_milli,
                chain,
                path: entry.path(),
            });
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("no sample files in {}", samples.display())));
    }
    out.sort_by_key(|f| (f.n, f.r_milli, f.chain));
    Ok(out)
}

/// Groups ordered sample files by cell.
pub(crate) fn by_cell(files: &[SampleFile]) -> Vec<&[SampleFile]> {
    files
        .chunk_by(|a, b| a.n == b.n && a.r_milli == b.r_milli)
        .collect()
}

/// Valid frames of one file and the number of frames that could not be used.
pub fn read_frames(path: &Path) -> Result<(Vec<Frame>, u64)> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut frames = Vec::new();
    let mut bad = 0;
    for item in FrameReader::new(std::io::BufReader::new(file)) {
        match item {
            FrameRead::Frame(f) => frames.push(f),
            FrameRead::Corrupt(_) | FrameRead::Truncated(_) => bad += 1,
        }
    }
    Ok((frames, bad))
}

/// Writes `bytes` to `dir/rel` through a temporary file and a rename.
pub(crate) fn write_atomic(dir: &Path, rel: &str, bytes: &[u8]) -> Result<()> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub(crate) fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// CSV float: shortest round-trip form, `nan` for undefined values.
pub(crate) fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        x.to_string()
    }
}

//! Reflection-move Markov chain on walks that accommodate a tube of radius r.
//!
//! Each step proposes either a single reflection (tail beyond `v_i` mirrored
//! through a random plane through `v_i`) or a double reflection (two such
//! reflections at `i < j`, the second drawn against the once-reflected walk).
//! Planes are drawn uniformly on the projective sphere, conditioned on the
//! new bend angle at the reflection site being admissible. The candidate is
//! kept if it accommodates the tube; otherwise the chain stays put.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geom::{angle_between, reflect_direction, Plane, Vec3, Walk};
use crate::thickness::{accommodates_tube_of, ThicknessParams};

/// Accepted moves between edge-length renormalizations.
pub const RENORMALIZE_EVERY: u64 = 1_000_000;

/// Name of the generator behind every chain, recorded in campaign metadata.
pub const RNG_IDENTITY: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64(seed) + set_stream(stream)";

pub const DEFAULT_MOVE_MIX: f64 = 0.5;
/// One uniform plane per proposal: a plane that breaks the bend constraint
/// rejects the move, so every proposal is symmetric and rejections are counted
/// the way reference acceptance rates are. Larger values resample the plane
/// at the same vertex, which is faster per accepted move but biases the chain.
pub const DEFAULT_MAX_PLANE_RETRIES: usize = 1;

/// Seeded generator for one chain; distinct streams are independent.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n: usize,
    pub r: f64,
    pub seed: u64,
    /// Independent RNG stream (chain index within a campaign).
    pub stream: u64,
    /// Accepted moves discarded before the first sample.
    pub burn_in: u64,
    /// Accepted moves between emitted samples.
    pub stride: u64,
    pub samples: usize,
    /// Probability of proposing a single (rather than double) reflection.
    pub move_mix: f64,
    pub max_plane_retries: usize,
}

impl ChainConfig {
    /// Defaults: burn-in `10 n`, stride `n`, one sample, even move mix.
    pub fn new(n: usize, r: f64, seed: u64) -> Self {
        ChainConfig {
            n,
            r,
            seed,
            stream: 0,
            burn_in: 10 * n as u64,
            stride: n as u64,
            samples: 1,
            move_mix: DEFAULT_MOVE_MIX,
            max_plane_retries: DEFAULT_MAX_PLANE_RETRIES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return Err(Error::Config(format!("r must be >= 0, got {}", self.r)));
        }
        if self.stride < 1 {
            return Err(Error::Config("stride must be >= 1".into()));
        }
        if self.samples < 1 {
            return Err(Error::Config("samples must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.move_mix) {
            return Err(Error::Config(format!(
                "move_mix must lie in [0, 1], got {}",
                self.move_mix
            )));
        }
        if self.n < 3 && self.move_mix < 1.0 {
            return Err(Error::Config(
                "double reflections need n >= 3; set move_mix = 1 for n = 2".into(),
            ));
        }
        if self.max_plane_retries < 1 {
            return Err(Error::Config("max_plane_retries must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChainStats {
    pub proposed: u64,
    pub accepted: u64,
    pub renormalizations: u64,
}

impl ChainStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn merge(&mut self, other: &ChainStats) {
        self.proposed += other.proposed;
        self.accepted += other.accepted;
        self.renormalizations += other.renormalizations;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    Single,
    Double,
}

/// A concrete reflection move: `(i, P_i)` and, for double moves, `(j, P_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveProposal {
    pub first: (usize, Plane),
    pub second: Option<(usize, Plane)>,
}

impl MoveProposal {
    pub fn kind(&self) -> MoveKind {
        if self.second.is_some() {
            MoveKind::Double
        } else {
            MoveKind::Single
        }
    }

    /// Applies the reflections in order; planes are re-anchored at their vertices.
    pub fn apply(&self, walk: &Walk) -> Walk {
        let mut out = walk.clone();
        self.apply_in_place(&mut out);
        out
    }

    fn apply_in_place(&self, walk: &mut Walk) {
        walk.reflect_tail_in_place(self.first.0, &self.first.1);
        if let Some((j, p)) = &self.second {
            walk.reflect_tail_in_place(*j, p);
        }
    }

    /// The move that undoes this one: the same reflections in reverse order.
    ///
    /// A single reflection is its own inverse. For a double move the second
    /// plane must be re-anchored at the image of `v_j` after undoing the first.
    pub fn inverse(&self, walk_after: &Walk) -> MoveProposal {
        match self.second {
            None => *self,
            Some((j, pj)) => {
                let (i, pi) = self.first;
                MoveProposal {
                    first: (j, Plane::from_unit(walk_after.vertex(j), pj.normal())),
                    second: Some((i, pi)),
                }
            }
        }
    }
}

/// Uniform direction on the unit sphere from a normalized Gaussian vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n2 = v.norm2();
        if n2 > 1e-24 {
            return v / n2.sqrt();
        }
    }
}

/// Bend angle at `v_i` after mirroring `v_{i+1}` through the plane with unit normal `u` through `v_i`.
#[inline]
fn reflected_angle(v: &[Vec3], i: usize, u: Vec3) -> f64 {
    let back = v[i - 1] - v[i];
    let fwd = reflect_direction(v[i + 1] - v[i], u);
    angle_between(back, fwd)
}

/// Draws a plane through `v_i` whose tail reflection leaves an admissible bend at `v_i`.
pub fn propose_allowable_plane<R: Rng + ?Sized>(
    walk: &Walk,
    i: usize,
    params: &ThicknessParams,
    rng: &mut R,
    max_retries: usize,
) -> Result<Plane> {
    if i == 0 || i >= walk.n() {
        return Err(Error::Precondition(format!(
            "reflection vertex {i} outside 1..={}",
            walk.n() - 1
        )));
    }
    draw_plane(walk.vertices(), i, params, rng, max_retries)
}

fn draw_plane<R: Rng + ?Sized>(
    v: &[Vec3],
    i: usize,
    params: &ThicknessParams,
    rng: &mut R,
    max_retries: usize,
) -> Result<Plane> {
    for _ in 0..max_retries {
        let u = random_unit(rng);
        if params.theta_min() <= 0.0 || reflected_angle(v, i, u) >= params.theta_min() {
            return Ok(Plane::from_unit(v[i], u));
        }
    }
    Err(Error::ProposalExhausted(max_retries))
}

/// Thickness test for a proposed state. At `r = 0` only an exact
/// self-intersection could fail it, which reflections of a self-avoiding walk
/// produce with probability zero, so the check is skipped.
fn admissible(v: &[Vec3], params: &ThicknessParams) -> bool {
    params.r() == 0.0 || accommodates_tube_of(v, params)
}

/// Draws a full move of the given kind against `walk`.
pub fn propose_move<R: Rng + ?Sized>(
    walk: &Walk,
    kind: MoveKind,
    params: &ThicknessParams,
    rng: &mut R,
    max_retries: usize,
) -> Result<MoveProposal> {
    let n = walk.n();
    match kind {
        MoveKind::Single => {
            let i = rng.random_range(1..n);
            let p = draw_plane(walk.vertices(), i, params, rng, max_retries)?;
            Ok(MoveProposal {
                first: (i, p),
                second: None,
            })
        }
        MoveKind::Double => {
            if n < 3 {
                return Err(Error::Precondition("double reflection needs n >= 3".into()));
            }
            let a = rng.random_range(1..n);
            let mut b = rng.random_range(1..n - 1);
            if b >= a {
                b += 1;
            }
            let (i, j) = (a.min(b), a.max(b));
            let pi = draw_plane(walk.vertices(), i, params, rng, max_retries)?;
            let mut once = walk.clone();
            once.reflect_tail_in_place(i, &pi);
            let pj = draw_plane(once.vertices(), j, params, rng, max_retries)?;
            Ok(MoveProposal {
                first: (i, pi),
                second: Some((j, pj)),
            })
        }
    }
}

fn step_kind<R: Rng + ?Sized>(
    walk: &Walk,
    kind: MoveKind,
    params: &ThicknessParams,
    rng: &mut R,
    max_retries: usize,
) -> (Walk, bool, Option<MoveProposal>) {
    let mv = match propose_move(walk, kind, params, rng, max_retries) {
        Ok(mv) => mv,
        Err(_) => return (walk.clone(), false, None),
    };
    let candidate = mv.apply(walk);
    if admissible(candidate.vertices(), params) {
        (candidate, true, Some(mv))
    } else {
        (walk.clone(), false, Some(mv))
    }
}

/// One single-reflection step. Rejected steps return the input walk unchanged.
pub fn single_reflection_step<R: Rng + ?Sized>(
    walk: &Walk,
    params: &ThicknessParams,
    rng: &mut R,
) -> (Walk, bool) {
    let (w, ok, _) = step_kind(walk, MoveKind::Single, params, rng, DEFAULT_MAX_PLANE_RETRIES);
    (w, ok)
}

/// One double-reflection step. Rejected steps return the input walk unchanged.
pub fn double_reflection_step<R: Rng + ?Sized>(
    walk: &Walk,
    params: &ThicknessParams,
    rng: &mut R,
) -> (Walk, bool) {
    let (w, ok, _) = step_kind(walk, MoveKind::Double, params, rng, DEFAULT_MAX_PLANE_RETRIES);
    (w, ok)
}

/// The straight walk along +x, the chain's starting state.
pub fn straight_walk(n: usize) -> Result<Walk> {
    Walk::straight(n)
}

/// A running chain: owns its state, generator and counters.
pub struct Chain {
    config: ChainConfig,
    params: ThicknessParams,
    walk: Walk,
    rng: ChaCha8Rng,
    stats: ChainStats,
    since_renormalize: u64,
}

impl Chain {
    pub fn new(config: ChainConfig) -> Result<Self> {
        config.validate()?;
        let params = ThicknessParams::new(config.r)?;
        let walk = Walk::straight(config.n)?;
        let rng = chain_rng(config.seed, config.stream);
        Ok(Chain {
            config,
            params,
            walk,
            rng,
            stats: ChainStats::default(),
            since_renormalize: 0,
        })
    }

    pub fn walk(&self) -> &Walk {
        &self.walk
    }

    pub fn stats(&self) -> ChainStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = ChainStats::default();
    }

    pub fn params(&self) -> &ThicknessParams {
        &self.params
    }

    /// Performs one proposal; returns the accepted move, if any.
    pub fn step(&mut self) -> Option<MoveProposal> {
        let kind = if self.config.move_mix >= 1.0 || self.rng.random::<f64>() < self.config.move_mix {
            MoveKind::Single
        } else {
            MoveKind::Double
        };
        self.stats.proposed += 1;
        let mv = match propose_move(
            &self.walk,
            kind,
            &self.params,
            &mut self.rng,
            self.config.max_plane_retries,
        ) {
            Ok(mv) => mv,
            Err(_) => return None,
        };
        let mut candidate = self.walk.clone();
        mv.apply_in_place(&mut candidate);
        if !admissible(candidate.vertices(), &self.params) {
            return None;
        }
        self.walk = candidate;
        self.stats.accepted += 1;
        self.since_renormalize += 1;
        if self.since_renormalize >= RENORMALIZE_EVERY {
            self.walk.renormalize();
            self.stats.renormalizations += 1;
            self.since_renormalize = 0;
        }
        Some(mv)
    }

    /// Steps until `count` moves have been accepted.
    pub fn advance_accepted(&mut self, count: u64) {
        let mut done = 0;
        while done < count {
            if self.step().is_some() {
                done += 1;
            }
        }
    }

    /// Runs burn-in and stride per the configuration, passing each sample to `emit`.
    pub fn run<F: FnMut(usize, &Walk)>(&mut self, mut emit: F) {
        self.advance_accepted(self.config.burn_in);
        for k in 0..self.config.samples {
            self.advance_accepted(self.config.stride);
            emit(k, &self.walk);
        }
    }
}

/// Streams samples to `emit` and returns the final statistics.
pub fn run_chain_with<F: FnMut(usize, &Walk)>(config: &ChainConfig, emit: F) -> Result<ChainStats> {
    let mut chain = Chain::new(config.clone())?;
    chain.run(emit);
    Ok(chain.stats())
}

/// Runs a chain from the straight walk and collects its samples.
pub fn run_chain(config: &ChainConfig) -> Result<(Vec<Walk>, ChainStats)> {
    let mut out = Vec::with_capacity(config.samples);
    let stats = run_chain_with(config, |_, w| out.push(w.clone()))?;
    Ok((out, stats))
}

/// Long-run acceptance after burn-in for a fresh chain at `(n, r)`.
pub fn measure_acceptance(
    n: usize,
    r: f64,
    proposals: u64,
    seed: u64,
    stream: u64,
    move_mix: f64,
) -> Result<ChainStats> {
    let mut config = ChainConfig::new(n, r, seed);
    config.stream = stream;
    config.move_mix = move_mix;
    measure_acceptance_with(config, proposals)
}

/// Counts `proposals` steps after the configured burn-in; samples and stride are ignored.
pub fn measure_acceptance_with(config: ChainConfig, proposals: u64) -> Result<ChainStats> {
    let burn_in = config.burn_in;
    let mut chain = Chain::new(config)?;
    chain.advance_accepted(burn_in);
    chain.reset_stats();
    for _ in 0..proposals {
        chain.step();
    }
    Ok(chain.stats())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptanceCell {
    pub n: usize,
    pub r: f64,
    pub stats: ChainStats,
}

impl AcceptanceCell {
    /// Acceptance in percent.
    pub fn percent(&self) -> f64 {
        100.0 * self.stats.acceptance_rate()
    }
}

/// Stream index for cell `(n, r)` and chain `k`; stable across runs and thread counts.
pub fn cell_stream(n: usize, r: f64, chain: u64) -> u64 {
    let r_milli = (r * 1000.0).round() as u64;
    ((n as u64) << 40) ^ (r_milli << 24) ^ chain
}

/// Acceptance percentages over a grid of lengths and radii, one fresh chain per cell.
pub fn acceptance_table(
    lengths: &[usize],
    radii: &[f64],
    proposals_per_cell: u64,
    seed: u64,
) -> Result<Vec<AcceptanceCell>> {
    let mut out = Vec::with_capacity(lengths.len() * radii.len());
    for &n in lengths {
        for &r in radii {
            let stats = measure_acceptance(
                n,
                r,
                proposals_per_cell,
                seed,
                cell_stream(n, r, 0),
                DEFAULT_MOVE_MIX,
            )?;
            out.push(AcceptanceCell { n, r, stats });
        }
    }
    Ok(out)
}

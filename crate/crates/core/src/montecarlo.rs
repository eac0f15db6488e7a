//! Seedable ensemble simulation of Bernoulli walks.
//!
//! The ensemble is cut into chunks of `chunk_size` walks. Chunk `i` draws
//! from ChaCha8 keyed by `seed` on stream `i` (`rand_chacha` 0.9, whose
//! output is value-stable across releases), so a report depends only on
//! `(seed, walks, chunk_size, p, max_steps, barrier)` and not on how many
//! threads ran the chunks. Each step takes one uniform `f64` draw `u` and
//! moves forward iff `u < p`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barrier::{absorption_probability, q1p};
use crate::error::{Error, Result};
use crate::prob::Odds;
use crate::walk::{q0p, reachable};

/// Identifier of the random stream layout, bumped whenever reports for a
/// fixed config would change.
pub const RNG_SCHEME: &str = "chacha8-rand_chacha-0.9/seed_from_u64/stream=chunk/v1";

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarrierMode {
    None,
    /// Absorbing barrier at the origin, active from step 2 on.
    DelayedAtOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub p: f64,
    pub max_steps: u32,
    pub walks: u64,
    pub seed: u64,
    pub barrier: BarrierMode,
    pub chunk_size: u64,
}

impl SimulationConfig {
    pub fn new(p: f64, max_steps: u32, walks: u64, seed: u64, barrier: BarrierMode) -> Self {
        Self {
            p,
            max_steps,
            walks,
            seed,
            barrier,
            chunk_size: 16_384,
        }
    }

    pub fn with_chunk_size(mut self, chunk_size: u64) -> Self {
        self.chunk_size = chunk_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(0.0..=1.0).contains(&self.p) {
            return fail(format!("p = {} is outside [0, 1]", self.p));
        }
        if self.max_steps == 0 || !self.max_steps.is_multiple_of(2) {
            return fail(format!("max_steps = {} must be even and positive", self.max_steps));
        }
        if self.walks == 0 {
            return fail("walks must be at least 1".into());
        }
        if self.chunk_size == 0 {
            return fail("chunk_size must be at least 1".into());
        }
        Ok(())
    }

    fn chunks(&self) -> u64 {
        self.walks.div_ceil(self.chunk_size)
    }
}

/// Counts of one chunk, or of the merged ensemble.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Tally {
    /// Index `m` counts walks whose first return (absorption) was at step `2m`.
    first_return: Vec<u64>,
    escaped: u64,
    /// Index `j` counts walks that ended at `k = 2j - max_steps`.
    occupancy: Vec<u64>,
}

impl Tally {
    fn empty(max_steps: u32) -> Self {
        Self {
            first_return: vec![0; max_steps as usize / 2 + 1],
            escaped: 0,
            occupancy: vec![0; max_steps as usize + 1],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.first_return.iter_mut().zip(other.first_return) {
            *a += b;
        }
        for (a, b) in self.occupancy.iter_mut().zip(other.occupancy) {
            *a += b;
        }
        self.escaped += other.escaped;
        self
    }
}

fn run_chunk(config: &SimulationConfig, chunk: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chunk);
    let start = chunk * config.chunk_size;
    let count = config.chunk_size.min(config.walks - start);
    let absorbing = config.barrier == BarrierMode::DelayedAtOrigin;
    let n = config.max_steps;
    let mut tally = Tally::empty(n);

    for _ in 0..count {
        let mut k: i64 = 0;
        let mut first_return = None;
        for step in 1..=n {
            let u: f64 = rng.random();
            k += if u < config.p { 1 } else { -1 };
            if k == 0 && first_return.is_none() {
                first_return = Some(step);
                if absorbing {
                    break;
                }
            }
        }
        match first_return {
            Some(step) => tally.first_return[step as usize / 2] += 1,
            None => tally.escaped += 1,
        }
        if !(absorbing && first_return.is_some()) {
            tally.occupancy[((k + i64::from(n)) / 2) as usize] += 1;
        }
    }
    tally
}

fn simulate_chunks(config: &SimulationConfig) -> Tally {
    (0..config.chunks())
        .into_par_iter()
        .map(|chunk| run_chunk(config, chunk))
        .reduce(|| Tally::empty(config.max_steps), Tally::merge)
}

/// Runs the ensemble on the global rayon pool.
pub fn simulate(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    Ok(SimulationReport::build(config.clone(), simulate_chunks(config)))
}

/// Runs the ensemble on a dedicated pool of `threads` workers. The report is
/// identical for every `threads >= 1`.
pub fn simulate_with_threads(config: &SimulationConfig, threads: usize) -> Result<SimulationReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start thread pool: {e}")))?;
    let tally = pool.install(|| simulate_chunks(config));
    Ok(SimulationReport::build(config.clone(), tally))
}

/// Free walks: occupancy after `max_steps` plus first-return times.
pub fn run_free_walks(config: &SimulationConfig) -> Result<SimulationReport> {
    if config.barrier != BarrierMode::None {
        return Err(Error::InvalidConfig("free walks need barrier = none".into()));
    }
    simulate(config)
}

/// Walks absorbed at their first return to the origin.
pub fn run_absorbing_walks(config: &SimulationConfig) -> Result<SimulationReport> {
    if config.barrier != BarrierMode::DelayedAtOrigin {
        return Err(Error::InvalidConfig(
            "absorbing walks need barrier = delayed_at_origin".into(),
        ));
    }
    simulate(config)
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let high = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (low, high)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// First return (absorption) at step `index`.
    FirstReturn,
    Escape,
    /// Position `index` after the last step (survivors only with a barrier).
    Occupancy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub statistic: Statistic,
    pub index: Option<i64>,
    pub count: u64,
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    fn new(statistic: Statistic, index: Option<i64>, count: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(count, trials, Z_95);
        Self {
            statistic,
            index,
            count,
            value: count as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    pub fn covers(&self, probability: f64) -> bool {
        self.ci_low <= probability && probability <= self.ci_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub rng: String,
    /// `(step, count)` for every even step `2..=max_steps`.
    pub first_return_histogram: Vec<(u32, u64)>,
    pub escaped_count: u64,
    /// `(k, count)` for every `k` reachable at `max_steps`.
    pub occupancy_histogram: Vec<(i64, u64)>,
    pub estimates: Vec<Estimate>,
}

impl SimulationReport {
    fn build(config: SimulationConfig, tally: Tally) -> Self {
        let n = config.max_steps;
        let walks = config.walks;
        let first_return_histogram: Vec<(u32, u64)> =
            (1..=n / 2).map(|m| (2 * m, tally.first_return[m as usize])).collect();
        let occupancy_histogram: Vec<(i64, u64)> =
            reachable(n).enumerate().map(|(j, k)| (k, tally.occupancy[j])).collect();
        let mut estimates = Vec::new();
        for &(step, count) in &first_return_histogram {
            estimates.push(Estimate::new(
                Statistic::FirstReturn,
                Some(i64::from(step)),
                count,
                walks,
            ));
        }
        estimates.push(Estimate::new(Statistic::Escape, None, tally.escaped, walks));
        for &(k, count) in &occupancy_histogram {
            estimates.push(Estimate::new(Statistic::Occupancy, Some(k), count, walks));
        }
        Self {
            config,
            rng: RNG_SCHEME.to_string(),
            first_return_histogram,
            escaped_count: tally.escaped,
            occupancy_histogram,
            estimates,
        }
    }

    pub fn first_return_count(&self, step: u32) -> u64 {
        self.first_return_histogram
            .iter()
            .find(|(s, _)| *s == step)
            .map_or(0, |(_, c)| *c)
    }

    pub fn occupancy_count(&self, k: i64) -> u64 {
        self.occupancy_histogram
            .iter()
            .find(|(kk, _)| *kk == k)
            .map_or(0, |(_, c)| *c)
    }

    pub fn escape_fraction(&self) -> f64 {
        self.escaped_count as f64 / self.config.walks as f64
    }

    pub fn estimate(&self, statistic: Statistic, index: Option<i64>) -> Option<&Estimate> {
        self.estimates
            .iter()
            .find(|e| e.statistic == statistic && e.index == index)
    }

    /// Exact-model probability of each estimated statistic, in estimate order.
    pub fn predictions(&self) -> Vec<f64> {
        let odds = Odds::real(self.config.p);
        let n = self.config.max_steps;
        let absorbing = self.config.barrier == BarrierMode::DelayedAtOrigin;
        let absorbed = |step: i64| absorption_probability((step / 2) as u32, &odds).expect("step >= 2");
        self.estimates
            .iter()
            .map(|e| match (e.statistic, e.index) {
                (Statistic::FirstReturn, Some(step)) => absorbed(step),
                (Statistic::Escape, _) => 1.0 - (1..=n / 2).map(|m| absorbed(2 * i64::from(m))).sum::<f64>(),
                (Statistic::Occupancy, Some(k)) if absorbing => q1p(n, k, &odds).abs(),
                (Statistic::Occupancy, Some(k)) => q0p(n, k, &odds),
                _ => unreachable!("indexed statistics carry an index"),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub statistic: Statistic,
    pub index: Option<i64>,
    pub observed: u64,
    pub expected: f64,
    pub z_score: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub threshold: f64,
    pub deviations: Vec<Deviation>,
}

impl DeviationSummary {
    pub fn flagged(&self) -> impl Iterator<Item = &Deviation> {
        self.deviations.iter().filter(|d| d.flagged)
    }

    pub fn any_flagged(&self) -> bool {
        self.flagged().next().is_some()
    }

    pub fn max_abs_z(&self) -> f64 {
        self.deviations.iter().map(|d| d.z_score.abs()).fold(0.0, f64::max)
    }
}

/// Binomial z-score of `observed` successes in `trials` against `probability`.
/// Infinite when the model forbids the observation outright.
pub fn z_score(observed: u64, trials: u64, probability: f64) -> f64 {
    let n = trials as f64;
    let mean = n * probability;
    let var = n * probability * (1.0 - probability);
    let diff = observed as f64 - mean;
    if var <= 0.0 {
        return if diff.abs() < 0.5 {
            0.0
        } else {
            diff.signum() * f64::INFINITY
        };
    }
    diff / var.sqrt()
}

/// Compares every estimate with the exact distribution and flags those with
/// `|z| > threshold`.
pub fn compare_report(report: &SimulationReport, threshold: f64) -> DeviationSummary {
    let deviations = report
        .estimates
        .iter()
        .zip(report.predictions())
        .map(|(e, expected)| {
            let z = z_score(e.count, report.config.walks, expected);
            Deviation {
                statistic: e.statistic,
                index: e.index,
                observed: e.count,
                expected,
                z_score: z,
                flagged: z.abs() > threshold,
            }
        })
        .collect();
    DeviationSummary { threshold, deviations }
}

/// Histogram of first-return steps as a map, for callers that prefer lookup.
pub fn first_return_map(report: &SimulationReport) -> BTreeMap<u32, u64> {
    report.first_return_histogram.iter().copied().collect()
}

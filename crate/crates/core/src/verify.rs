//! Identity, asymptotic and stochastic self-checks, shared by the CLI
//! `verify` command and the acceptance tests.

use std::fmt::Debug;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::barrier::{absorption_probability, p_barrier, past_difference, q1p, q2p};
use crate::error::{Error, Result};
use crate::exact::{self, ratio, ExactRational};
use crate::montecarlo::{compare_report, simulate, simulate_with_threads, BarrierMode, SimulationConfig, Z_95};
use crate::prob::{Coupling, Odds};
use crate::series::{
    central_return, gamma_closed_form, gamma_term, p_from_x, partial_sum, stirling_estimates, zeta_closed_form, Branch,
    PartialSums, SeriesKind,
};
use crate::walk::{q0p, return_probability};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Exact,
    Asymptotic,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    Only(Suite),
}

impl FromStr for Selection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Self::All,
            "exact" => Self::Only(Suite::Exact),
            "asymptotic" => Self::Only(Suite::Asymptotic),
            "stochastic" => Self::Only(Suite::Stochastic),
            other => return Err(Error::InvalidConfig(format!("unknown suite {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Largest step index for the exact suite, largest return index for the
    /// asymptotic suite.
    pub max_n: u32,
    pub walks: u64,
    pub seed: u64,
    /// `|z|` above which a Monte Carlo statistic counts as disagreeing.
    pub z_threshold: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_n: 40,
            walks: 1_000_000,
            seed: 0,
            z_threshold: 4.0,
        }
    }
}

pub fn run(selection: Selection, options: &VerifyOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let wants = |suite| selection == Selection::All || selection == Selection::Only(suite);
    if wants(Suite::Exact) {
        checks.extend(exact_suite(options.max_n));
    }
    if wants(Suite::Asymptotic) {
        checks.extend(asymptotic_suite(options.max_n)?);
    }
    if wants(Suite::Stochastic) {
        checks.extend(stochastic_suite(options.walks, options.seed, options.z_threshold)?);
    }
    Ok(checks)
}

/// Counts evaluated points and keeps the first mismatch.
struct Tally {
    suite: Suite,
    name: String,
    points: u64,
    failure: Option<String>,
}

impl Tally {
    fn new(suite: Suite, name: impl Into<String>) -> Self {
        Self {
            suite,
            name: name.into(),
            points: 0,
            failure: None,
        }
    }

    fn expect(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.points += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn equal<T: PartialEq + Debug>(&mut self, lhs: T, rhs: T, at: impl FnOnce() -> String) {
        let ok = lhs == rhs;
        self.expect(ok, || format!("{}: {lhs:?} != {rhs:?}", at()));
    }

    fn fail(&mut self, why: String) {
        self.expect(false, || why);
    }

    fn finish(self) -> Check {
        let detail = match &self.failure {
            None => format!("{} points", self.points),
            Some(f) => format!("failed at {f} ({} points)", self.points),
        };
        Check {
            suite: self.suite,
            name: self.name,
            passed: self.failure.is_none(),
            detail,
        }
    }
}

/// Rational equality checks of the walk and barrier identities for
/// `n <= max_n`, `p` in {1/4, 1/2, 3/4} and barriers `a` in {1, 2, 3}.
pub fn exact_suite(max_n: u32) -> Vec<Check> {
    let mut checks = Vec::new();
    for (num, den) in [(1, 4), (1, 2), (3, 4)] {
        let odds = Odds::exact(ratio(num, den));
        let tag = format!("p={num}/{den}");
        checks.extend(walk_identities(max_n, &odds, &tag));
        checks.extend(barrier_identities(max_n, &odds, &tag));
    }
    checks.extend(closed_form_checks(max_n));
    checks
}

fn span(n: u32) -> std::ops::RangeInclusive<i64> {
    -(i64::from(n) + 2)..=i64::from(n) + 2
}

fn walk_identities(max_n: u32, odds: &Odds<ExactRational>, tag: &str) -> Vec<Check> {
    let (p, q) = (&odds.p, &odds.q);
    let mut norm = Tally::new(Suite::Exact, format!("normalization {tag}"));
    let mut rec = Tally::new(Suite::Exact, format!("free recurrence {tag}"));
    for n in 0..=max_n {
        let total: ExactRational = span(n).map(|k| q0p(n, k, odds)).sum();
        norm.equal(total, ExactRational::one(), || format!("n={n}"));
        if n == 0 {
            continue;
        }
        for k in span(n) {
            let lhs = q0p(n, k, odds);
            let rhs = p * q0p(n - 1, k - 1, odds) + q * q0p(n - 1, k + 1, odds);
            rec.equal(lhs, rhs, || format!("n={n} k={k}"));
        }
    }
    vec![norm.finish(), rec.finish()]
}

fn barrier_identities(max_n: u32, odds: &Odds<ExactRational>, tag: &str) -> Vec<Check> {
    let (p, q) = (&odds.p, &odds.q);
    let four_pq = odds.four_pq();
    let mut checks = Vec::new();

    for a in 1..=3u32 {
        let mut rec = Tally::new(Suite::Exact, format!("barrier recurrence {tag} a={a}"));
        let mut boundary = Tally::new(Suite::Exact, format!("barrier boundary {tag} a={a}"));
        for n in 0..=max_n {
            let pb = |n: u32, k: i64| p_barrier(n, k, a, odds);
            match pb(n, i64::from(a)) {
                Ok(v) => boundary.equal(v, ExactRational::zero(), || format!("n={n}")),
                Err(e) => boundary.fail(format!("n={n}: {e}")),
            }
            if n == 0 {
                continue;
            }
            for k in span(n) {
                match (pb(n, k), pb(n - 1, k - 1), pb(n - 1, k + 1)) {
                    (Ok(lhs), Ok(l), Ok(r)) => rec.equal(lhs, p * l + q * r, || format!("n={n} k={k}")),
                    _ => rec.fail(format!("n={n} k={k}: evaluation error")),
                }
            }
        }
        checks.push(rec.finish());
        checks.push(boundary.finish());
    }

    let mut compact1 = Tally::new(Suite::Exact, format!("q1p compact form {tag}"));
    let mut centre1 = Tally::new(Suite::Exact, format!("q1p vanishes at even centre {tag}"));
    let mut via_barrier = Tally::new(Suite::Exact, format!("q1p from barrier at 1 {tag}"));
    let mut compact2 = Tally::new(Suite::Exact, format!("q2p compact form {tag}"));
    let mut composed = Tally::new(Suite::Exact, format!("q2p as past difference of q1p {tag}"));
    let mut central = Tally::new(Suite::Exact, format!("q2p central value {tag}"));
    let mut time_diff = Tally::new(Suite::Exact, format!("q2p time difference {tag}"));
    let mut split = Tally::new(Suite::Exact, format!("absorption split {tag}"));

    for n in 1..=max_n {
        let nn = ExactRational::from_integer(n.into());
        for k in span(n) {
            let kk = ExactRational::from_integer(k.into());
            compact1.equal(q1p(n, k, odds), -&kk / &nn * q0p(n, k, odds), || format!("n={n} k={k}"));
            match p_barrier(n - 1, k + 1, 1, odds) {
                Ok(v) => via_barrier.equal(q1p(n, k, odds), q * v, || format!("n={n} k={k}")),
                Err(e) => via_barrier.fail(format!("n={n} k={k}: {e}")),
            }
            if n < 2 {
                continue;
            }
            let Ok(v2) = q2p(n, k, odds) else {
                compact2.fail(format!("n={n} k={k}: q2p undefined"));
                continue;
            };
            let factor = (&kk * &kk - &nn) / (&nn * (&nn - ExactRational::one()));
            compact2.equal(v2.clone(), factor * q0p(n, k, odds), || format!("n={n} k={k}"));
            match past_difference(q1p, n, k, odds) {
                Ok(d) => composed.equal(v2.clone(), d, || format!("n={n} k={k}")),
                Err(e) => composed.fail(format!("n={n} k={k}: {e}")),
            }
            let rhs = q0p(n, k, odds) - &four_pq * q0p(n - 2, k, odds);
            time_diff.equal(v2, rhs, || format!("n={n} k={k}"));
        }
        if n % 2 == 0 {
            centre1.equal(q1p(n, 0, odds), ExactRational::zero(), || format!("n={n}"));
            let m = n / 2;
            let divisor = ExactRational::from_integer((2 * i64::from(m) - 1).into());
            match (q2p(n, 0, odds), absorption_probability(m, odds)) {
                (Ok(v2), Ok(absorbed)) => {
                    central.equal(v2.clone(), -q0p(n, 0, odds) / divisor, || format!("n={n}"));
                    let parts = q * q1p(n - 1, 1, odds).abs() + p * q1p(n - 1, -1, odds).abs();
                    split.equal(v2.abs(), parts.clone(), || format!("n={n}"));
                    split.equal(absorbed, parts, || format!("absorption n={n}"));
                }
                _ => central.fail(format!("n={n}: evaluation error")),
            }
        }
    }

    checks.extend([
        compact1.finish(),
        centre1.finish(),
        via_barrier.finish(),
        compact2.finish(),
        composed.finish(),
        central.finish(),
        time_diff.finish(),
        split.finish(),
    ]);
    checks
}

/// Exact partial sums at `x = 1` against their closed forms, `n <= max_n`.
pub fn closed_form_checks(max_n: u32) -> Vec<Check> {
    let unit = Coupling::Exact(ExactRational::one());
    let mut out = Vec::new();
    for (kind, closed) in [
        (SeriesKind::Gamma, gamma_closed_form as fn(u32) -> ExactRational),
        (SeriesKind::Zeta, zeta_closed_form),
    ] {
        let mut tally = Tally::new(Suite::Exact, format!("{kind} partial sum closed form at x=1"));
        match PartialSums::new(kind, &unit) {
            Ok(sums) => {
                for s in sums.take(max_n as usize + 1) {
                    let n = s.n;
                    tally.equal(s.exact_value, Some(closed(n)), || format!("n={n}"));
                }
            }
            Err(e) => tally.fail(e.to_string()),
        }
        out.push(tally.finish());
    }
    out
}

/// `count` log-spaced integers covering `[lo, hi]`, endpoints included.
pub fn log_grid(lo: u32, hi: u32, count: usize) -> Vec<u32> {
    let (a, b) = (f64::from(lo).ln(), f64::from(hi).ln());
    let mut grid: Vec<u32> = (0..count)
        .map(|i| {
            let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            (a + t * (b - a)).exp().round() as u32
        })
        .map(|n| n.clamp(lo, hi))
        .collect();
    grid.dedup();
    grid
}

/// Stirling bounds on the closed forms at 50 log-spaced `n` in
/// `[min(10, max_n), max_n]`, plus the series/walk bridge for real `x`.
pub fn asymptotic_suite(max_n: u32) -> Result<Vec<Check>> {
    if max_n == 0 {
        return Err(Error::InvalidConfig("max_n must be at least 1".into()));
    }
    let mut gamma = Tally::new(Suite::Asymptotic, "gamma_2n(1) within 1/(2n) of sqrt(4n/pi)");
    let mut zeta = Tally::new(Suite::Asymptotic, "zeta_2n(1) within 1/(4n) of 1/sqrt(pi n)");
    for n in log_grid(10.min(max_n), max_n, 50) {
        let est = stirling_estimates(n)?;
        let centre = exact::to_f64(&central_return(n));
        let g = (2.0 * f64::from(n) + 1.0) * centre;
        let rel_g = (g / est.gamma - 1.0).abs();
        gamma.expect(rel_g <= 1.0 / (2.0 * f64::from(n)), || format!("n={n}: {rel_g:e}"));
        let rel_z = (centre / est.zeta - 1.0).abs();
        zeta.expect(rel_z <= 1.0 / (4.0 * f64::from(n)), || format!("n={n}: {rel_z:e}"));
    }

    let mut bridge = Tally::new(Suite::Asymptotic, "gamma term equals return probability (rel 1e-12)");
    for x in [0.1, 0.5, 0.9, 1.0] {
        let coupling = Coupling::real(x)?;
        for branch in [Branch::Plus, Branch::Minus] {
            let odds = p_from_x(x, branch)?.odds_real();
            for l in 0..=50u32 {
                let term = gamma_term(l, &coupling).to_f64();
                let walk = return_probability(l, &odds);
                let rel = ((term - walk) / walk).abs();
                bridge.expect(rel <= 1e-12, || format!("x={x} {branch:?} l={l}: {rel:e}"));
            }
        }
    }

    let mut analytic = Tally::new(Suite::Asymptotic, "gamma_400(0.6) equals 1.25 (abs 1e-10)");
    let sum = partial_sum(SeriesKind::Gamma, 200, &Coupling::real(0.6)?)?.real_value;
    analytic.expect((sum - 1.25).abs() <= 1e-10, || format!("{sum}"));

    Ok(vec![gamma.finish(), zeta.finish(), bridge.finish(), analytic.finish()])
}

/// Monte Carlo ensembles compared with the exact model.
///
/// Agreement is judged per statistic at `|z| <= z_threshold`; the escape and
/// early-absorption fractions are additionally reported against their Wilson
/// 95% intervals.
pub fn stochastic_suite(walks: u64, seed: u64, z_threshold: f64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let configs = [
        (0.25, BarrierMode::None),
        (0.5, BarrierMode::None),
        (0.75, BarrierMode::None),
        (0.5, BarrierMode::DelayedAtOrigin),
    ];
    for (i, (p, barrier)) in configs.into_iter().enumerate() {
        let config = SimulationConfig::new(p, 10, walks, seed.wrapping_add(i as u64), barrier);
        let report = simulate(&config)?;
        let summary = compare_report(&report, z_threshold);
        let mode = match barrier {
            BarrierMode::None => "free",
            BarrierMode::DelayedAtOrigin => "absorbing",
        };
        let mut t = Tally::new(
            Suite::Stochastic,
            format!("{mode} walks p={p} agree with exact model (|z| <= {z_threshold})"),
        );
        for d in &summary.deviations {
            t.expect(!d.flagged, || {
                format!("{:?} {:?}: z={:.2}", d.statistic, d.index, d.z_score)
            });
        }
        checks.push(t.finish());

        if barrier == BarrierMode::DelayedAtOrigin {
            let absorbed: u64 = report.first_return_histogram.iter().map(|(_, c)| c).sum();
            let mut conservation = Tally::new(Suite::Stochastic, "absorbed plus escaped equals walks");
            conservation.equal(absorbed + report.escaped_count, walks, String::new);
            checks.push(conservation.finish());

            let mut coverage = Tally::new(
                Suite::Stochastic,
                "escape and absorption fractions in Wilson 95% intervals",
            );
            let targets = [
                (
                    "escape",
                    report.estimates.iter().find(|e| e.index.is_none()),
                    exact::to_f64(&central_return(5)),
                ),
                ("step 2", report.estimates.iter().find(|e| e.index == Some(2)), 0.5),
                ("step 4", report.estimates.iter().find(|e| e.index == Some(4)), 0.125),
            ];
            for (what, est, truth) in targets {
                match est {
                    Some(e) => coverage.expect(e.covers(truth), || {
                        format!("{what}: {truth} not in [{}, {}] (z={Z_95})", e.ci_low, e.ci_high)
                    }),
                    None => coverage.fail(format!("{what}: missing estimate")),
                }
            }
            checks.push(coverage.finish());
        }
    }

    let small = SimulationConfig::new(0.5, 10, walks.min(200_000), seed, BarrierMode::None).with_chunk_size(4_096);
    let mut det = Tally::new(Suite::Stochastic, "reports identical at 1 and 4 threads");
    det.expect(
        simulate_with_threads(&small, 1)? == simulate_with_threads(&small, 4)?,
        String::new,
    );
    checks.push(det.finish());
    Ok(checks)
}

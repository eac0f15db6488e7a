//! Distribution of the free Bernoulli walk started at the origin.
//!
//! `q0p(n, k)` is the probability of being at `k` after `n` steps when each
//! step goes `+1` with probability `p` and `-1` with probability `1 - p`.
//! Unreachable points (`|k| > n` or `n + k` odd) have probability zero.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::exact::{self, binomial, ExactRational};
use crate::prob::{Number, Odds, WalkParams, Weight};

/// Index `j = (n + k) / 2` of forward steps, when `(n, k)` is reachable.
pub fn forward_steps(n: u32, k: i64) -> Option<u64> {
    let n = i64::from(n);
    if k.abs() > n || (n + k) % 2 != 0 {
        return None;
    }
    Some(((n + k) / 2) as u64)
}

pub fn is_reachable(n: u32, k: i64) -> bool {
    forward_steps(n, k).is_some()
}

/// Reachable coordinates after `n` steps, ascending: `-n, -n + 2, ..., n`.
pub fn reachable(n: u32) -> impl DoubleEndedIterator<Item = i64> + Clone {
    let n = i64::from(n);
    (0..=n).map(move |j| 2 * j - n)
}

/// Closed form `C(n, (n+k)/2) p^((n+k)/2) (1-p)^((n-k)/2)`, zero off the
/// reachable set.
pub fn q0p<W: Weight>(n: u32, k: i64, odds: &Odds<W>) -> W {
    match forward_steps(n, k) {
        Some(j) => W::binomial_mass(u64::from(n), j, &odds.p, &odds.q),
        None => W::zero(),
    }
}

/// Symmetric walk, `q0p(n, k, 1/2) = C(n, (n+k)/2) 2^-n`.
pub fn q0(n: u32, k: i64) -> ExactRational {
    match forward_steps(n, k) {
        Some(j) => ExactRational::new(binomial(u64::from(n), j as i64), BigInt::from(1) << n),
        None => ExactRational::zero(),
    }
}

/// `q0p(2n, 0)`, the probability of standing at the origin after step `2n`.
pub fn return_probability<W: Weight>(n: u32, odds: &Odds<W>) -> W {
    q0p(2 * n, 0, odds)
}

impl WalkParams {
    /// Return probability after step `2n`, exact when `p` is rational.
    ///
    /// With a coupling `x` attached, this is `C(2n, n) (x/2)^(2n)` and is
    /// computed from `x` alone; both values agree by the linkage check.
    pub fn return_probability(&self, n: u32) -> Number {
        match self.p.odds_exact() {
            Some(odds) => Number::Exact(return_probability(n, &odds)),
            None => match &self.x {
                Some(x) => Number::Real(central_binomial_weight(n, x.x_squared())),
                None => Number::Real(return_probability(n, &self.p.odds_real())),
            },
        }
    }
}

/// `C(2n, n) (x^2 / 4)^n` in floating point.
pub(crate) fn central_binomial_weight(n: u32, x_squared: f64) -> f64 {
    let quarter = x_squared / 4.0;
    f64::binomial_mass(2 * u64::from(n), u64::from(n), &quarter.sqrt(), &quarter.sqrt())
}

/// Generating rule of a [`LatticeDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Free,
    /// Absorbing barrier at `k = a`, active from the start.
    Barrier(u32),
    /// Absorbing barrier at the origin, active after the first step.
    DelayedBarrier,
}

/// One row `n` of signed probabilities over reachable `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDistribution<W> {
    pub n: u32,
    pub rule: Rule,
    values: BTreeMap<i64, W>,
}

impl<W: Weight> LatticeDistribution<W> {
    /// Evaluates `f` at every reachable `k` of row `n`.
    pub fn from_fn(n: u32, rule: Rule, mut f: impl FnMut(i64) -> W) -> Self {
        let values = reachable(n).map(|k| (k, f(k))).collect();
        Self { n, rule, values }
    }

    pub fn get(&self, k: i64) -> W {
        self.values.get(&k).cloned().unwrap_or_else(W::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &W)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> W {
        self.values.values().cloned().fold(W::zero(), |a, b| a + b)
    }

    /// Next row of a free walk by `Q(n+1, k) = p Q(n, k-1) + (1-p) Q(n, k+1)`.
    pub fn step(&self, odds: &Odds<W>) -> Self {
        Self::from_fn(self.n + 1, self.rule, |k| {
            odds.p.clone() * self.get(k - 1) + odds.q.clone() * self.get(k + 1)
        })
    }
}

/// Row `n` of the free walk built by the step recurrence from `{0: 1}`.
pub fn distribution_row<W: Weight>(n: u32, odds: &Odds<W>) -> LatticeDistribution<W> {
    let mut row = LatticeDistribution::from_fn(0, Rule::Free, |_| W::one());
    for _ in 0..n {
        row = row.step(odds);
    }
    row
}

/// Row `n` in exact mode when `p` is rational, real mode otherwise.
pub fn distribution_row_for(n: u32, params: &WalkParams) -> LatticeDistribution<Number> {
    match params.p.odds_exact() {
        Some(odds) => distribution_row(n, &odds).map(Number::Exact),
        None => distribution_row(n, &params.p.odds_real()).map(Number::Real),
    }
}

impl<W> LatticeDistribution<W> {
    pub fn map<U>(self, f: impl Fn(W) -> U) -> LatticeDistribution<U> {
        LatticeDistribution {
            n: self.n,
            rule: self.rule,
            values: self.values.into_iter().map(|(k, v)| (k, f(v))).collect(),
        }
    }

    pub fn values(&self) -> &BTreeMap<i64, W> {
        &self.values
    }

    pub fn records(&self) -> Vec<RowRecord>
    where
        W: Clone + Into<Number>,
    {
        self.values
            .iter()
            .map(|(k, v)| RowRecord::new(self.n, *k, &v.clone().into()))
            .collect()
    }
}

/// Serialized form of one lattice value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowRecord {
    pub n: u32,
    pub k: i64,
    /// Exact numerator and denominator as decimal strings, when exact.
    pub numerator: Option<String>,
    pub denominator: Option<String>,
    pub real_value: f64,
}

impl RowRecord {
    pub fn new(n: u32, k: i64, value: &Number) -> Self {
        let (numerator, denominator) = match value.as_exact() {
            Some(v) => (Some(v.numer().to_string()), Some(v.denom().to_string())),
            None => (None, None),
        };
        Self {
            n,
            k,
            numerator,
            denominator,
            real_value: value.to_f64(),
        }
    }
}

/// One row of a dyadic table: integer entries times `2^-exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleRow {
    pub n: u32,
    pub exponent: u32,
    pub entries: Vec<(i64, BigInt)>,
}

impl TriangleRow {
    /// Extracts the common factor `2^-n` from a row of dyadic rationals.
    pub fn from_dyadic(n: u32, row: &LatticeDistribution<ExactRational>) -> Self {
        let scale = ExactRational::from_integer(BigInt::from(1) << n);
        let entries = row
            .iter()
            .map(|(k, v)| {
                let scaled = v * &scale;
                assert!(scaled.is_integer(), "entry at k={k} is not a multiple of 2^-{n}");
                (k, scaled.to_integer())
            })
            .collect();
        Self {
            n,
            exponent: n,
            entries,
        }
    }

    pub fn get(&self, k: i64) -> Option<&BigInt> {
        self.entries.iter().find(|(kk, _)| *kk == k).map(|(_, v)| v)
    }

    pub fn value(&self, k: i64) -> ExactRational {
        self.get(k)
            .map(|v| ExactRational::from_integer(v.clone()) * exact::inverse_power_of_two(u64::from(self.exponent)))
            .unwrap_or_else(ExactRational::zero)
    }
}

/// Rows `0..=max_n` of the symmetric walk with the factor `2^-n` pulled out,
/// which leaves Pascal's triangle.
pub fn table1(max_n: u32) -> Vec<TriangleRow> {
    let half = Odds::exact(exact::ratio(1, 2));
    let mut row = distribution_row(0, &half);
    let mut rows = Vec::with_capacity(max_n as usize + 1);
    for n in 0..=max_n {
        if n > 0 {
            row = row.step(&half);
        }
        rows.push(TriangleRow::from_dyadic(n, &row));
    }
    rows
}

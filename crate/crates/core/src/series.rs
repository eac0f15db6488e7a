//! Binomial series of `gamma(x) = 1/sqrt(1-x^2)` and `zeta(x) = sqrt(1-x^2)`.
//!
//! The `l`-th term of the gamma series is `C(2l, l) (x/2)^(2l)`, which is the
//! return probability after step `2l` of a walk with `4p(1-p) = x^2`. The
//! zeta series subtracts `term / (2l - 1)`, the probability of absorption at
//! step `2l` with a delayed barrier at the origin. Partial sums are finite at
//! `x = ±1`, where they have closed forms:
//!
//! * `gamma_2n(1) = (2n+1) C(2n, n) / 4^n`
//! * `zeta_2n(1)  = C(2n, n) / 4^n`
//!
//! Partial sums are exact whenever `x^2` is rational and use compensated
//! summation otherwise.

use std::f64::consts::PI;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, binomial, generalized_binomial, ExactRational};
use crate::prob::{Coupling, Number, StepProbability, Weight};
use crate::walk::central_binomial_weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesKind {
    Gamma,
    Zeta,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Gamma => "gamma",
            Self::Zeta => "zeta",
        })
    }
}

/// Which root of `4p(1-p) = x^2` to take for `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    /// `p = (1 + sqrt(1-x^2)) / 2`.
    #[default]
    Plus,
    /// `p = (1 - sqrt(1-x^2)) / 2`.
    Minus,
}

/// `C(alpha, l) z^l`.
pub fn binomial_series_term<W: Weight>(alpha: &ExactRational, l: u64, z: &W) -> W {
    W::from_rational(&generalized_binomial(alpha, l)) * num_traits::pow(z.clone(), l as usize)
}

fn check_domain(x: &Coupling) -> Result<()> {
    let inside = match x {
        Coupling::Exact(v) => v.abs() <= ExactRational::one(),
        Coupling::ExactSquare(v) => !v.is_negative() && *v <= ExactRational::one(),
        Coupling::Real(v) => v.abs() <= 1.0,
    };
    if inside {
        Ok(())
    } else {
        Err(Error::Domain(x.to_string()))
    }
}

/// `C(2l, l) (x/2)^(2l)`.
pub fn gamma_term(l: u32, x: &Coupling) -> Number {
    match x.x_squared_exact() {
        Some(x2) => {
            let quarter = x2 / exact::integer(4);
            Number::Exact(
                ExactRational::from_integer(binomial(2 * u64::from(l), i64::from(l)))
                    * num_traits::pow(quarter, l as usize),
            )
        }
        None => Number::Real(central_binomial_weight(l, x.x_squared())),
    }
}

/// Magnitude `gamma_term(l, x) / (2l - 1)` of the `l`-th zeta term, `l >= 1`.
pub fn zeta_term(l: u32, x: &Coupling) -> Result<Number> {
    if l == 0 {
        return Err(Error::UndefinedPoint {
            what: "zeta term",
            n: 0,
        });
    }
    let divisor = 2 * u64::from(l) - 1;
    Ok(match gamma_term(l, x) {
        Number::Exact(v) => Number::Exact(v / ExactRational::from_integer(divisor.into())),
        Number::Real(v) => Number::Real(v / divisor as f64),
    })
}

/// Truncated gamma or zeta series through return index `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesPartialSum {
    pub kind: SeriesKind,
    pub x: f64,
    pub n: u32,
    #[serde(serialize_with = "serialize_optional_rational")]
    pub exact_value: Option<ExactRational>,
    pub real_value: f64,
}

fn serialize_optional_rational<S: serde::Serializer>(
    v: &Option<ExactRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

impl SeriesPartialSum {
    pub fn value(&self) -> Number {
        match &self.exact_value {
            Some(v) => Number::Exact(v.clone()),
            None => Number::Real(self.real_value),
        }
    }
}

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone)]
enum Accumulator {
    /// With `x^2 = a/b`, term `l` is `C(2l, l) a^l / (4b)^l`. Numerators
    /// are kept over the shared denominator `(4b)^l`, so no gcd is taken
    /// until a value is read out.
    Exact {
        a: BigInt,
        four_b: BigInt,
        term: BigInt,
        sum: BigInt,
        denominator: BigInt,
    },
    Real {
        x_squared: f64,
        term: f64,
        sum: CompensatedSum,
    },
}

/// Successive partial sums `n = 0, 1, 2, ...` of one series, each built from
/// the previous one with a single new term.
#[derive(Debug, Clone)]
pub struct PartialSums {
    kind: SeriesKind,
    x: f64,
    next: u32,
    acc: Accumulator,
}

impl PartialSums {
    pub fn new(kind: SeriesKind, x: &Coupling) -> Result<Self> {
        check_domain(x)?;
        let acc = match x.x_squared_exact() {
            Some(x_squared) => Accumulator::Exact {
                a: x_squared.numer().clone(),
                four_b: x_squared.denom() * 4u32,
                term: BigInt::one(),
                sum: BigInt::one(),
                denominator: BigInt::one(),
            },
            None => {
                let mut sum = CompensatedSum::default();
                sum.add(1.0);
                Accumulator::Real {
                    x_squared: x.x_squared(),
                    term: 1.0,
                    sum,
                }
            }
        };
        Ok(Self {
            kind,
            x: x.x(),
            next: 0,
            acc,
        })
    }

    /// Folds term `l` into the running sum.
    fn advance(&mut self, l: u32) {
        // C(2l, l) / C(2l-2, l-1) = 2(2l-1)/l, so the term ratio is (2l-1)/(2l) x^2.
        let l = u64::from(l);
        let (kind, zeta_divisor) = (self.kind, 2 * l - 1);
        match &mut self.acc {
            Accumulator::Exact {
                a,
                four_b,
                term,
                sum,
                denominator,
            } => {
                // C(2l, l) = C(2l-2, l-1) 2(2l-1) / l, and C(2l, l) / (2l-1)
                // is twice a Catalan number; both divisions are exact.
                *term = &*term * &*a * (2 * zeta_divisor) / l;
                *denominator *= &*four_b;
                *sum *= &*four_b;
                match kind {
                    SeriesKind::Gamma => *sum += &*term,
                    SeriesKind::Zeta => *sum -= &*term / zeta_divisor,
                }
            }
            Accumulator::Real { x_squared, term, sum } => {
                *term *= (2 * l - 1) as f64 / (2 * l) as f64 * *x_squared;
                match kind {
                    SeriesKind::Gamma => sum.add(*term),
                    SeriesKind::Zeta => sum.add(-*term / zeta_divisor as f64),
                }
            }
        }
    }

    fn snapshot(&self, n: u32) -> SeriesPartialSum {
        let (exact_value, real_value) = match &self.acc {
            Accumulator::Exact { sum, denominator, .. } => {
                let sum = ExactRational::new(sum.clone(), denominator.clone());
                let real = exact::to_f64(&sum);
                (Some(sum), real)
            }
            Accumulator::Real { sum, .. } => (None, sum.value()),
        };
        SeriesPartialSum {
            kind: self.kind,
            x: self.x,
            n,
            exact_value,
            real_value,
        }
    }

    /// The most recent gamma term, i.e. `gamma_term(n, x)` for the last `n`.
    pub fn current_term(&self) -> Number {
        match &self.acc {
            Accumulator::Exact { term, denominator, .. } => {
                Number::Exact(ExactRational::new(term.clone(), denominator.clone()))
            }
            Accumulator::Real { term, .. } => Number::Real(*term),
        }
    }
}

impl Iterator for PartialSums {
    type Item = SeriesPartialSum;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.next;
        if n > 0 {
            self.advance(n);
        }
        self.next = n.checked_add(1)?;
        Some(self.snapshot(n))
    }

    fn nth(&mut self, skip: usize) -> Option<Self::Item> {
        // Fold skipped terms in without materializing their partial sums.
        for _ in 0..skip {
            let n = self.next;
            if n > 0 {
                self.advance(n);
            }
            self.next = n.checked_add(1)?;
        }
        self.next()
    }
}

pub fn partial_sum(kind: SeriesKind, n: u32, x: &Coupling) -> Result<SeriesPartialSum> {
    Ok(PartialSums::new(kind, x)?
        .nth(n as usize)
        .expect("partial sums are unbounded"))
}

/// `sum_{m=0}^{n} C(2m, m) (x/2)^(2m)`.
pub fn gamma_partial_sum(n: u32, x: &Coupling) -> Result<SeriesPartialSum> {
    partial_sum(SeriesKind::Gamma, n, x)
}

/// `1 - sum_{m=1}^{n} C(2m, m) (x/2)^(2m) / (2m - 1)`.
pub fn zeta_partial_sum(n: u32, x: &Coupling) -> Result<SeriesPartialSum> {
    partial_sum(SeriesKind::Zeta, n, x)
}

/// `C(2n, n) / 4^n`, the symmetric return probability after step `2n`.
pub fn central_return(n: u32) -> ExactRational {
    ExactRational::new(binomial(2 * u64::from(n), i64::from(n)), BigInt::one() << (2 * n))
}

/// `gamma_2n(1) = (2n + 1) C(2n, n) / 4^n`.
pub fn gamma_closed_form(n: u32) -> ExactRational {
    central_return(n) * ExactRational::from_integer((2 * u64::from(n) + 1).into())
}

/// `zeta_2n(1) = C(2n, n) / 4^n`.
pub fn zeta_closed_form(n: u32) -> ExactRational {
    central_return(n)
}

/// `(1 ± sqrt(1 - x^2)) / 2`.
///
/// The smaller root is evaluated as `x^2 / (2 (1 + sqrt(1 - x^2)))` so that
/// both `p` and `1 - p` keep full relative precision.
pub fn p_from_x(x: f64, branch: Branch) -> Result<StepProbability> {
    if x.is_nan() || x.abs() > 1.0 {
        return Err(Error::Domain(x.to_string()));
    }
    let root = ((1.0 - x) * (1.0 + x)).sqrt();
    let large = (1.0 + root) / 2.0;
    let small = x * x / (2.0 * (1.0 + root));
    Ok(match branch {
        Branch::Plus => StepProbability::real_pair(large, small),
        Branch::Minus => StepProbability::real_pair(small, large),
    })
}

/// [`p_from_x`] for any coupling; exact when `sqrt(1 - x^2)` is rational.
pub fn p_from_coupling(x: &Coupling, branch: Branch) -> Result<StepProbability> {
    check_domain(x)?;
    if let Some(x2) = x.x_squared_exact() {
        if let Some(root) = exact::exact_sqrt(&(ExactRational::one() - x2)) {
            let half = exact::ratio(1, 2);
            let p = match branch {
                Branch::Plus => (ExactRational::one() + root) * half,
                Branch::Minus => (ExactRational::one() - root) * half,
            };
            return StepProbability::exact(p);
        }
    }
    p_from_x(x.x(), branch)
}

/// Large-`n` approximations from Stirling's formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StirlingEstimates {
    /// `C(2n, n) / 4^n ≈ 1/sqrt(pi n)`.
    pub q0_center: f64,
    /// `gamma_2n(1) ≈ sqrt(4n/pi)`.
    pub gamma: f64,
    /// `zeta_2n(1) ≈ 1/sqrt(pi n)`.
    pub zeta: f64,
    /// Absorption probability at step `2n`, `≈ 1/sqrt(4 pi n^3)`.
    pub absorption: f64,
}

impl StirlingEstimates {
    pub fn gamma_squared(&self) -> f64 {
        self.gamma * self.gamma
    }

    pub fn zeta_squared(&self) -> f64 {
        self.zeta * self.zeta
    }
}

pub fn stirling_estimates(n: u32) -> Result<StirlingEstimates> {
    if n == 0 {
        return Err(Error::UndefinedPoint {
            what: "Stirling estimate",
            n,
        });
    }
    let n = f64::from(n);
    let centre = 1.0 / (PI * n).sqrt();
    Ok(StirlingEstimates {
        q0_center: centre,
        gamma: (4.0 * n / PI).sqrt(),
        zeta: centre,
        absorption: 1.0 / (4.0 * PI * n * n * n).sqrt(),
    })
}

/// Ratio `E_a / E_e = sqrt(1 - x^2)` of received to emitted photon energy.
pub fn photon_energy_ratio(x: f64) -> Result<f64> {
    if x.is_nan() || x.abs() > 1.0 {
        return Err(Error::Domain(x.to_string()));
    }
    Ok(((1.0 - x) * (1.0 + x)).sqrt())
}

pub fn received_energy(emitted: f64, x: f64) -> Result<f64> {
    if emitted.is_nan() || emitted < 0.0 {
        return Err(Error::NegativeEnergy(emitted));
    }
    Ok(emitted * photon_energy_ratio(x)?)
}

/// One line of a series dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesRecord {
    pub kind: SeriesKind,
    pub x: f64,
    pub l: u32,
    /// Signed contribution of term `l` to the partial sum.
    pub term_value: Number,
    pub partial_sum_value: Number,
    pub closed_form_value: Option<Number>,
    pub stirling_estimate: Option<f64>,
}

/// Terms and partial sums `l = 0..=max_n`, with closed forms at `|x| = 1`.
pub fn series_dump(kind: SeriesKind, x: &Coupling, max_n: u32, with_stirling: bool) -> Result<Vec<SeriesRecord>> {
    let unit = x.is_unit();
    let mut sums = PartialSums::new(kind, x)?;
    let mut out = Vec::with_capacity(max_n as usize + 1);
    for l in 0..=max_n {
        let sum = sums.next().expect("unbounded");
        let gamma_term = sums.current_term();
        let term_value = match (kind, l) {
            (SeriesKind::Gamma, _) | (SeriesKind::Zeta, 0) => gamma_term,
            (SeriesKind::Zeta, _) => {
                let divisor = 2 * u64::from(l) - 1;
                match gamma_term {
                    Number::Exact(v) => Number::Exact(-v / ExactRational::from_integer(divisor.into())),
                    Number::Real(v) => Number::Real(-v / divisor as f64),
                }
            }
        };
        let closed_form_value = unit.then(|| {
            Number::Exact(match kind {
                SeriesKind::Gamma => gamma_closed_form(l),
                SeriesKind::Zeta => zeta_closed_form(l),
            })
        });
        let stirling_estimate = match (with_stirling, stirling_estimates(l)) {
            (true, Ok(est)) => Some(match kind {
                SeriesKind::Gamma => est.gamma,
                SeriesKind::Zeta => est.zeta,
            }),
            _ => None,
        };
        out.push(SeriesRecord {
            kind,
            x: x.x(),
            l,
            term_value,
            partial_sum_value: sum.value(),
            closed_form_value,
            stirling_estimate,
        });
    }
    Ok(out)
}

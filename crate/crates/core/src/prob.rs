//! Step probabilities and the scalar types probabilities are computed in.
//!
//! Every lattice quantity is generic over [`Weight`], implemented for
//! [`ExactRational`] (exact mode) and `f64` (real mode).

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, binomial, ExactRational};

/// Absolute tolerance on `|4p(1-p) - x^2|` when `x` is real.
pub const LINKAGE_TOLERANCE: f64 = 1e-12;

/// Scalar a lattice probability is evaluated in.
pub trait Weight: Clone + fmt::Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static {
    fn from_integer(v: &BigInt) -> Self;
    fn from_rational(v: &ExactRational) -> Self;
    fn to_f64(&self) -> f64;
    fn magnitude(&self) -> Self;

    /// `C(n, j) p^j q^(n-j)`.
    fn binomial_mass(n: u64, j: u64, p: &Self, q: &Self) -> Self;

    fn from_u64(v: u64) -> Self {
        Self::from_integer(&BigInt::from(v))
    }
}

impl Weight for ExactRational {
    fn from_integer(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }

    fn from_rational(v: &ExactRational) -> Self {
        v.clone()
    }

    fn to_f64(&self) -> f64 {
        exact::to_f64(self)
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn binomial_mass(n: u64, j: u64, p: &Self, q: &Self) -> Self {
        let c = BigRational::from_integer(binomial(n, j as i64));
        c * num_traits::pow(p.clone(), j as usize) * num_traits::pow(q.clone(), (n - j) as usize)
    }
}

impl Weight for f64 {
    fn from_integer(v: &BigInt) -> Self {
        v.to_f64().unwrap_or(f64::INFINITY)
    }

    fn from_rational(v: &ExactRational) -> Self {
        exact::to_f64(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn magnitude(&self) -> Self {
        self.abs()
    }

    fn binomial_mass(n: u64, j: u64, p: &Self, q: &Self) -> Self {
        if j > n {
            return 0.0;
        }
        // Interleave the q factors so the running product stays near O(n)
        // instead of overflowing through C(n, j) for large n.
        let mut pending_q = n - j;
        let mut acc = 1.0;
        for i in 1..=j {
            acc *= (n - j + i) as f64 / i as f64 * p;
            while acc > 1.0 && pending_q > 0 {
                acc *= q;
                pending_q -= 1;
            }
        }
        acc * q.powi(pending_q.min(i32::MAX as u64) as i32)
    }
}

/// Probability `p` of a forward step together with `q = 1 - p`.
///
/// `q` is carried separately so real-mode callers can supply a complement
/// that was computed without cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Odds<W> {
    pub p: W,
    pub q: W,
}

impl<W: Weight> Odds<W> {
    pub fn new(p: W) -> Self {
        let q = W::one() - p.clone();
        Self { p, q }
    }

    /// `4 p q`, the squared coupling `x^2`.
    pub fn four_pq(&self) -> W {
        W::from_u64(4) * self.p.clone() * self.q.clone()
    }

    /// Exchanged step probabilities `(1 - p, p)`.
    pub fn mirrored(&self) -> Self {
        Self {
            p: self.q.clone(),
            q: self.p.clone(),
        }
    }
}

impl Odds<ExactRational> {
    pub fn exact(p: ExactRational) -> Self {
        Self::new(p)
    }
}

impl Odds<f64> {
    pub fn real(p: f64) -> Self {
        Self::new(p)
    }
}

/// Forward-step probability, exact when it was given as a rational.
#[derive(Debug, Clone, PartialEq)]
pub struct StepProbability {
    exact: Option<ExactRational>,
    real: f64,
    complement: f64,
}

impl StepProbability {
    pub fn exact(p: ExactRational) -> Result<Self> {
        if p.is_negative() || p > BigRational::one() {
            return Err(Error::ProbabilityOutOfRange(p.to_string()));
        }
        let real = exact::to_f64(&p);
        let complement = exact::to_f64(&(BigRational::one() - &p));
        Ok(Self {
            exact: Some(p),
            real,
            complement,
        })
    }

    pub fn real(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(p.to_string()));
        }
        Ok(Self {
            exact: None,
            real: p,
            complement: 1.0 - p,
        })
    }

    /// Real step probability with an independently computed complement.
    pub(crate) fn real_pair(p: f64, complement: f64) -> Self {
        Self {
            exact: None,
            real: p,
            complement,
        }
    }

    pub fn half() -> Self {
        Self::exact(exact::ratio(1, 2)).expect("1/2 is a probability")
    }

    pub fn exact_value(&self) -> Option<&ExactRational> {
        self.exact.as_ref()
    }

    pub fn value(&self) -> f64 {
        self.real
    }

    pub fn complement(&self) -> f64 {
        self.complement
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn odds_exact(&self) -> Option<Odds<ExactRational>> {
        self.exact.clone().map(Odds::exact)
    }

    pub fn odds_real(&self) -> Odds<f64> {
        Odds {
            p: self.real,
            q: self.complement,
        }
    }

    /// `4 p (1 - p)` exactly, when `p` is exact.
    pub fn four_pq_exact(&self) -> Option<ExactRational> {
        self.odds_exact().map(|o| o.four_pq())
    }
}

/// The real parameter `x` of the series, linked to a walk by `4p(1-p) = x^2`.
///
/// Only `x^2` enters the series, so exact mode needs `x^2` rational, not `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    /// Rational `x`.
    Exact(ExactRational),
    /// Rational `x^2` with `x = sqrt(x^2) >= 0`.
    ExactSquare(ExactRational),
    Real(f64),
}

impl Coupling {
    pub fn exact(x: ExactRational) -> Result<Self> {
        if x.abs() > BigRational::one() {
            return Err(Error::Domain(x.to_string()));
        }
        Ok(Self::Exact(x))
    }

    pub fn real(x: f64) -> Result<Self> {
        if x.is_nan() || x.abs() > 1.0 {
            return Err(Error::Domain(x.to_string()));
        }
        Ok(Self::Real(x))
    }

    /// The coupling of a walk, `x = sqrt(4 p (1 - p))`.
    pub fn from_step(p: &StepProbability) -> Self {
        match p.four_pq_exact() {
            Some(x2) => match exact::exact_sqrt(&x2) {
                Some(x) => Self::Exact(x),
                None => Self::ExactSquare(x2),
            },
            None => Self::Real((4.0 * p.value() * p.complement()).sqrt()),
        }
    }

    pub fn x(&self) -> f64 {
        match self {
            Self::Exact(x) => exact::to_f64(x),
            Self::ExactSquare(x2) => exact::to_f64(x2).sqrt(),
            Self::Real(x) => *x,
        }
    }

    pub fn x_squared_exact(&self) -> Option<ExactRational> {
        match self {
            Self::Exact(x) => Some(x * x),
            Self::ExactSquare(x2) => Some(x2.clone()),
            Self::Real(_) => None,
        }
    }

    pub fn x_squared(&self) -> f64 {
        match self {
            Self::Exact(x) => {
                let x = exact::to_f64(x);
                x * x
            }
            Self::ExactSquare(x2) => exact::to_f64(x2),
            Self::Real(x) => x * x,
        }
    }

    /// `|x| == 1`, where the series partial sums have closed forms.
    pub fn is_unit(&self) -> bool {
        match self.x_squared_exact() {
            Some(x2) => x2.is_one(),
            None => self.x_squared() == 1.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Self::Real(_))
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(x) => write!(f, "{x}"),
            Self::ExactSquare(x2) => write!(f, "sqrt({x2})"),
            Self::Real(x) => write!(f, "{x}"),
        }
    }
}

/// Step probability plus, optionally, the coupling `x` it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkParams {
    pub p: StepProbability,
    pub x: Option<Coupling>,
}

impl WalkParams {
    pub fn new(p: StepProbability) -> Self {
        Self { p, x: None }
    }

    /// Pairs `p` with `x`, checking `4p(1-p) = x^2` (exactly when both sides
    /// are exact, to [`LINKAGE_TOLERANCE`] otherwise).
    pub fn linked(p: StepProbability, x: Coupling) -> Result<Self> {
        let matches = match (p.four_pq_exact(), x.x_squared_exact()) {
            (Some(lhs), Some(rhs)) => lhs == rhs,
            _ => (4.0 * p.value() * p.complement() - x.x_squared()).abs() <= LINKAGE_TOLERANCE,
        };
        if !matches {
            return Err(Error::LinkageMismatch {
                four_pq: 4.0 * p.value() * p.complement(),
                x_squared: x.x_squared(),
            });
        }
        Ok(Self { p, x: Some(x) })
    }
}

/// A probability computed either exactly or in floating point.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Number {
    Exact(#[serde(serialize_with = "serialize_rational")] ExactRational),
    Real(f64),
}

fn serialize_rational<S: serde::Serializer>(v: &ExactRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Exact(v) => exact::to_f64(v),
            Self::Real(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&ExactRational> {
        match self {
            Self::Exact(v) => Some(v),
            Self::Real(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Exact(v) => v.is_zero(),
            Self::Real(v) => *v == 0.0,
        }
    }
}

impl From<ExactRational> for Number {
    fn from(v: ExactRational) -> Self {
        Self::Exact(v)
    }
}

impl From<f64> for Number {
    fn from(v: f64) -> Self {
        Self::Real(v)
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(v) => write!(f, "{v}"),
            Self::Real(v) => write!(f, "{v}"),
        }
    }
}

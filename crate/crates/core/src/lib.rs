//! Exact and simulated Bernoulli random walks.
//!
//! Return probabilities of the free walk, absorbing-barrier distributions
//! built from past differences, partial sums of the binomial series of
//! `1/sqrt(1-x^2)` and `sqrt(1-x^2)`, and a seedable ensemble simulator to
//! cross-check them.

pub mod barrier;
pub mod error;
pub mod exact;
pub mod montecarlo;
pub mod prob;
pub mod series;
pub mod verify;
pub mod walk;

pub use error::{Error, ParseError, Result};
pub use exact::{BigInteger, ExactRational};
pub use prob::{Coupling, Number, Odds, StepProbability, WalkParams, Weight};
pub use walk::{LatticeDistribution, Rule};

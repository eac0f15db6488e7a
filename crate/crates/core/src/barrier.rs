//! Absorbing barriers and past differences.
//!
//! The past difference of a lattice function `f` is
//! `(1-p) f(n-1, k+1) - p f(n-1, k-1)`. Applied once to the free walk it
//! gives the walk with an absorbing barrier at the origin that switches on
//! after the first step (`q1p`); applied twice it gives `q2p`, whose value at
//! the origin is, up to sign, the probability of being absorbed exactly at
//! step `2n`.
//!
//! Values are signed. Points behind a barrier carry negative mass, and
//! `q1p` is negative for `k > 0`; the probabilities are the absolute values.

use crate::error::{Error, Result};
use crate::exact::{self, ExactRational};
use crate::prob::{Odds, Weight};
use crate::walk::{q0p, LatticeDistribution, Rule, TriangleRow};

/// Free walk with an absorbing barrier at `k = a >= 1`, by subtracting the
/// mirror image started at `2a`:
/// `q0p(n, k) - (p/(1-p))^a q0p(n, k - 2a)`.
pub fn p_barrier<W: Weight>(n: u32, k: i64, a: u32, odds: &Odds<W>) -> Result<W> {
    if a == 0 {
        return Err(Error::InvalidBarrier(a));
    }
    if odds.q.is_zero() {
        return Err(Error::DegenerateParameter);
    }
    let ratio = odds.p.clone() / odds.q.clone();
    let weight = num_traits::pow(ratio, a as usize);
    Ok(q0p(n, k, odds) - weight * q0p(n, k - 2 * i64::from(a), odds))
}

/// `(1-p) f(n-1, k+1) - p f(n-1, k-1)`.
pub fn past_difference<W, F>(f: F, n: u32, k: i64, odds: &Odds<W>) -> Result<W>
where
    W: Weight,
    F: Fn(u32, i64, &Odds<W>) -> W,
{
    if n == 0 {
        return Err(Error::UndefinedPoint {
            what: "past difference",
            n,
        });
    }
    Ok(odds.q.clone() * f(n - 1, k + 1, odds) - odds.p.clone() * f(n - 1, k - 1, odds))
}

/// The `order`-fold past difference of `f`, formed by iterating
/// [`past_difference`]. Needs `n >= order`.
pub fn past_difference_iterated<W, F>(f: &F, order: u32, n: u32, k: i64, odds: &Odds<W>) -> Result<W>
where
    W: Weight,
    F: Fn(u32, i64, &Odds<W>) -> W,
{
    if order == 0 {
        return Ok(f(n, k, odds));
    }
    if n < order {
        return Err(Error::UndefinedPoint {
            what: "iterated past difference",
            n,
        });
    }
    let ahead = past_difference_iterated(f, order - 1, n - 1, k + 1, odds)?;
    let behind = past_difference_iterated(f, order - 1, n - 1, k - 1, odds)?;
    Ok(odds.q.clone() * ahead - odds.p.clone() * behind)
}

/// Walk with a delayed absorbing barrier at the origin (active after the
/// first step), as the past difference of the free walk.
///
/// At `n = 0` the row is `+1` at the origin. Only its magnitude is fixed by
/// the construction; the positive sign is a convention.
pub fn q1p<W: Weight>(n: u32, k: i64, odds: &Odds<W>) -> W {
    if n == 0 {
        return if k == 0 { W::one() } else { W::zero() };
    }
    past_difference(q0p, n, k, odds).expect("n >= 1")
}

/// `(-k/n) q0p(n, k)` for `n >= 1`, equal to [`q1p`].
pub fn q1p_compact<W: Weight>(n: u32, k: i64, odds: &Odds<W>) -> Result<W> {
    if n == 0 {
        return Err(Error::UndefinedPoint {
            what: "compact form of q1p",
            n,
        });
    }
    let factor = W::from_rational(&ExactRational::new((-k).into(), n.into()));
    Ok(factor * q0p(n, k, odds))
}

/// Second-order past difference of the free walk:
/// `(1-p)^2 q0p(n-2, k+2) + p^2 q0p(n-2, k-2) - 2p(1-p) q0p(n-2, k)`.
pub fn q2p<W: Weight>(n: u32, k: i64, odds: &Odds<W>) -> Result<W> {
    if n < 2 {
        return Err(Error::UndefinedPoint {
            what: "second-order past difference",
            n,
        });
    }
    let (p, q) = (odds.p.clone(), odds.q.clone());
    let two = W::from_u64(2);
    Ok(
        q.clone() * q.clone() * q0p(n - 2, k + 2, odds) + p.clone() * p.clone() * q0p(n - 2, k - 2, odds)
            - two * p * q * q0p(n - 2, k, odds),
    )
}

/// `(k^2 - n) / (n (n-1)) q0p(n, k)` for `n >= 2`, equal to [`q2p`].
pub fn q2p_compact<W: Weight>(n: u32, k: i64, odds: &Odds<W>) -> Result<W> {
    if n < 2 {
        return Err(Error::UndefinedPoint {
            what: "compact form of q2p",
            n,
        });
    }
    let n64 = i64::from(n);
    let factor = W::from_rational(&ExactRational::new((k * k - n64).into(), (n64 * (n64 - 1)).into()));
    Ok(factor * q0p(n, k, odds))
}

/// Probability that the walk with a delayed barrier at the origin is
/// absorbed exactly at step `2n`: `q0p(2n, 0) / (2n - 1)`.
pub fn absorption_probability<W: Weight>(n: u32, odds: &Odds<W>) -> Result<W> {
    if n == 0 {
        return Err(Error::UndefinedPoint {
            what: "absorption probability",
            n,
        });
    }
    Ok(q0p(2 * n, 0, odds) / W::from_u64(2 * u64::from(n) - 1))
}

/// Row `n` of [`p_barrier`] over every reachable `k`, including the
/// negative values beyond the barrier.
pub fn barrier_row<W: Weight>(n: u32, a: u32, odds: &Odds<W>) -> Result<LatticeDistribution<W>> {
    // Validate once so the row builder below cannot fail midway.
    p_barrier(0, 0, a, odds)?;
    Ok(LatticeDistribution::from_fn(n, Rule::Barrier(a), |k| {
        p_barrier(n, k, a, odds).expect("validated")
    }))
}

/// Row `n` of [`q1p`].
pub fn delayed_row<W: Weight>(n: u32, odds: &Odds<W>) -> LatticeDistribution<W> {
    LatticeDistribution::from_fn(n, Rule::DelayedBarrier, |k| q1p(n, k, odds))
}

/// Rows `1..=max_n` of `q1p(·, ·, 1/2)` with the factor `2^-n` pulled out.
pub fn table2(max_n: u32) -> Vec<TriangleRow> {
    let half = Odds::exact(exact::ratio(1, 2));
    (1..=max_n)
        .map(|n| TriangleRow::from_dyadic(n, &delayed_row(n, &half)))
        .collect()
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::exact::{integer, ratio};
    use crate::walk::reachable;
    use num_traits::Signed;

    type Q = ExactRational;

    fn odds(p: (i64, i64)) -> Odds<Q> {
        Odds::exact(ratio(p.0, p.1))
    }

    const PS: [(i64, i64); 3] = [(1, 4), (1, 2), (3, 4)];

    /// Path enumeration with a sink at `barrier`, active from step `from`.
    /// Returns surviving mass per final `k` and absorbed mass per step.
    fn enumerate_absorbing(n: u32, p: &Q, barrier: i64, from: u32) -> (BTreeMap<i64, Q>, BTreeMap<u32, Q>) {
        let q = integer(1) - p;
        let mut alive = BTreeMap::new();
        let mut absorbed = BTreeMap::new();
        for mask in 0u64..(1 << n) {
            let mut k = 0i64;
            let mut prob = integer(1);
            let mut hit = None;
            for step in 1..=n {
                if mask >> (step - 1) & 1 == 1 {
                    k += 1;
                    prob *= p;
                } else {
                    k -= 1;
                    prob *= &q;
                }
                if step >= from && k == barrier {
                    hit = Some(step);
                    break;
                }
            }
            // Paths that stop early were counted once per suffix; rescale.
            match hit {
                Some(step) => {
                    let dup = integer(1i64 << (n - step));
                    *absorbed.entry(step).or_insert_with(|| integer(0)) += prob / dup;
                }
                None => *alive.entry(k).or_insert_with(|| integer(0)) += prob,
            }
        }
        (alive, absorbed)
    }

    #[test]
    fn p_barrier_examples() {
        let half = odds((1, 2));
        for n in 0..=10 {
            for a in 1..=3 {
                assert_eq!(p_barrier(n, i64::from(a), a, &half).unwrap(), integer(0));
            }
        }
        assert_eq!(p_barrier(1, -1, 1, &half).unwrap(), ratio(1, 2));
        assert_eq!(p_barrier(2, 0, 1, &half).unwrap(), ratio(1, 4));
        assert_eq!(p_barrier(3, 0, 1, &odds((1, 1))), Err(Error::DegenerateParameter));
        assert_eq!(p_barrier(3, 0, 0, &half), Err(Error::InvalidBarrier(0)));
        assert!(p_barrier(4, 2, 1, &half).unwrap() < integer(0));
    }

    #[test]
    fn p_barrier_matches_absorbed_paths() {
        for p in PS {
            let pr = ratio(p.0, p.1);
            for a in 1..=3u32 {
                for n in 0..=12u32 {
                    let (alive, _) = enumerate_absorbing(n, &pr, i64::from(a), 1);
                    for k in reachable(n).filter(|k| *k < i64::from(a)) {
                        let want = alive.get(&k).cloned().unwrap_or_else(|| integer(0));
                        assert_eq!(p_barrier(n, k, a, &odds(p)).unwrap(), want, "p={p:?} a={a} n={n} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn p_barrier_recurrence_and_boundary() {
        for p in PS {
            let o = odds(p);
            for a in 1..=3u32 {
                for n in 0..=40u32 {
                    assert_eq!(p_barrier(n, i64::from(a), a, &o).unwrap(), integer(0));
                    if n < 1 {
                        continue;
                    }
                    for k in -(n as i64) - 2..=n as i64 + 2 {
                        let lhs = p_barrier(n, k, a, &o).unwrap();
                        let rhs = &o.p * p_barrier(n - 1, k - 1, a, &o).unwrap()
                            + &o.q * p_barrier(n - 1, k + 1, a, &o).unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn past_difference_examples() {
        let half = odds((1, 2));
        assert_eq!(past_difference(q0p, 1, -1, &half).unwrap(), ratio(1, 2));
        assert_eq!(past_difference(q0p, 2, 0, &half).unwrap(), integer(0));
        let one = |_: u32, _: i64, _: &Odds<Q>| integer(1);
        for (n, k) in [(1, 0), (5, -3), (9, 4)] {
            assert_eq!(past_difference(one, n, k, &half).unwrap(), integer(0));
        }
        assert!(matches!(
            past_difference(q0p, 0, 0, &half),
            Err(Error::UndefinedPoint { n: 0, .. })
        ));
    }

    #[test]
    fn q1p_examples() {
        let half = odds((1, 2));
        assert_eq!(q1p(1, -1, &half), ratio(1, 2));
        assert_eq!(q1p(1, 1, &half), ratio(-1, 2));
        assert_eq!(q1p(4, 2, &half), ratio(-1, 8));
        assert_eq!(q1p(6, 0, &half), integer(0));
        assert_eq!(q1p(5, -1, &half), ratio(1, 16));
        assert_eq!(q1p(0, 0, &half).abs(), integer(1));
    }

    #[test]
    fn q1p_matches_surviving_paths() {
        for p in PS {
            let pr = ratio(p.0, p.1);
            for n in 1..=14u32 {
                let (alive, absorbed) = enumerate_absorbing(n, &pr, 0, 2);
                for k in reachable(n) {
                    let want = alive.get(&k).cloned().unwrap_or_else(|| integer(0));
                    assert_eq!(q1p(n, k, &odds(p)).abs(), want, "n={n} k={k}");
                }
                for (step, mass) in absorbed {
                    assert_eq!(step % 2, 0);
                    assert_eq!(absorption_probability(step / 2, &odds(p)).unwrap(), mass);
                }
            }
        }
    }

    #[test]
    fn q1p_identities() {
        for p in PS {
            let o = odds(p);
            for n in 1..=60u32 {
                for k in reachable(n) {
                    let v = q1p(n, k, &o);
                    assert_eq!(v, q1p_compact(n, k, &o).unwrap());
                    if n <= 40 {
                        assert_eq!(v, &o.q * p_barrier(n - 1, k + 1, 1, &o).unwrap());
                    }
                }
                if n % 2 == 0 {
                    assert_eq!(q1p(n, 0, &o), integer(0));
                }
            }
            // Same step recurrence as the free walk, from n = 1 on.
            for n in 2..=40u32 {
                for k in reachable(n) {
                    let rhs = &o.p * q1p(n - 1, k - 1, &o) + &o.q * q1p(n - 1, k + 1, &o);
                    assert_eq!(q1p(n, k, &o), rhs);
                }
            }
        }
        let half = odds((1, 2));
        for n in 1..=40u32 {
            for k in reachable(n) {
                assert_eq!(q1p(n, k, &half), -q1p(n, -k, &half));
            }
        }
    }

    #[test]
    fn q2p_examples() {
        let half = odds((1, 2));
        assert_eq!(q2p(2, 0, &half).unwrap(), ratio(-1, 2));
        assert_eq!(q2p(4, 0, &half).unwrap(), ratio(-1, 8));
        assert_eq!(q2p(2, 2, &half).unwrap(), ratio(1, 4));
        assert!(q2p(1, 1, &half).is_err());
    }

    #[test]
    fn q2p_identities() {
        for p in PS {
            let o = odds(p);
            let four_pq = o.four_pq();
            for n in 2..=40u32 {
                for k in reachable(n) {
                    let v = q2p(n, k, &o).unwrap();
                    assert_eq!(v, q2p_compact(n, k, &o).unwrap());
                    assert_eq!(v, past_difference(q1p, n, k, &o).unwrap());
                    assert_eq!(v, past_difference_iterated(&q0p, 2, n, k, &o).unwrap());
                    assert_eq!(v, q0p(n, k, &o) - &four_pq * q0p(n - 2, k, &o));
                }
            }
            for n in 1..=30u32 {
                let centre = q2p(2 * n, 0, &o).unwrap();
                let free = q0p(2 * n, 0, &o);
                assert_eq!(centre, -(free.clone() / integer(2 * i64::from(n) - 1)));
                let split = &o.q * q1p(2 * n - 1, 1, &o).abs() + &o.p * q1p(2 * n - 1, -1, &o).abs();
                assert_eq!(centre.abs(), split);
                assert_eq!(absorption_probability(n, &o).unwrap(), centre.abs());
            }
        }
    }

    #[test]
    fn iterated_difference_orders() {
        let o = odds((1, 3));
        for n in 3..=12u32 {
            for k in reachable(n) {
                let third = past_difference_iterated(&q0p, 3, n, k, &o).unwrap();
                let via_q2p = past_difference(|n, k, o: &Odds<Q>| q2p(n, k, o).unwrap(), n, k, &o).unwrap();
                assert_eq!(third, via_q2p);
            }
        }
        assert!(past_difference_iterated(&q0p, 3, 2, 0, &o).is_err());
    }

    #[test]
    fn absorption_examples() {
        let half = odds((1, 2));
        assert_eq!(absorption_probability(1, &half).unwrap(), ratio(1, 2));
        assert_eq!(absorption_probability(2, &half).unwrap(), ratio(1, 8));
        assert_eq!(absorption_probability(3, &half).unwrap(), ratio(1, 16));
        assert!(absorption_probability(0, &half).is_err());
    }

    #[test]
    fn table2_rows() {
        let rows = table2(6);
        let expected: [&[i64]; 6] = [
            &[1, -1],
            &[1, 0, -1],
            &[1, 1, -1, -1],
            &[1, 2, 0, -2, -1],
            &[1, 3, 2, -2, -3, -1],
            &[1, 4, 5, 0, -5, -4, -1],
        ];
        for (row, want) in rows.iter().zip(expected) {
            let got: Vec<i64> = row.entries.iter().map(|(_, v)| i64::try_from(v).unwrap()).collect();
            assert_eq!(got, want, "row {}", row.n);
        }
        // Absorption values sit at k = -1 on odd rows.
        for (n, want) in [(1u32, 1i64), (3, 1), (5, 2)] {
            assert_eq!(rows[n as usize - 1].get(-1), Some(&want.into()));
        }
        let single = table2(1);
        assert_eq!(single.len(), 1);
        let row8 = &table2(8)[7];
        let half = odds((1, 2));
        for k in reachable(8) {
            assert_eq!(row8.value(k), q1p_compact(8, k, &half).unwrap());
        }
    }

    #[test]
    fn real_mode_tracks_exact() {
        let exact = odds((1, 4));
        let real = Odds::real(0.25);
        for n in 2..=30u32 {
            for k in reachable(n) {
                let e = q2p(n, k, &exact).unwrap().to_f64();
                let r = q2p(n, k, &real).unwrap();
                assert!((e - r).abs() <= 1e-14, "n={n} k={k}");
            }
        }
        assert_eq!(p_barrier(2, 0, 1, &Odds::real(1.0)), Err(Error::DegenerateParameter));
    }
}

//! The bound function `m(a_1..a_n; N)`: the minimum of `prod y_i` over
//! integer vectors with `1 <= y_i <= a_i` and `sum y_i = N`, taken to be 1
//! when `N < n`.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest grid the brute-force evaluator agrees to walk.
const BRUTE_FORCE_LIMIT: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MBoundQuery {
    a: Vec<u64>,
    target: u64,
}

impl MBoundQuery {
    pub fn new(a: Vec<u64>, target: i128) -> Result<Self> {
        if a.is_empty() {
            return Err(invalid("m-bound needs at least one a_i"));
        }
        if a.contains(&0) {
            return Err(invalid("every a_i must be >= 1"));
        }
        let total: u128 = a.iter().map(|&x| x as u128).sum();
        if target < 1 || target as u128 > total {
            return Err(invalid(format!("N = {target} outside [1, {total}]")));
        }
        Ok(MBoundQuery { a, target: target as u64 })
    }

    pub fn a(&self) -> &[u64] {
        &self.a
    }
    pub fn target(&self) -> u64 {
        self.target
    }
    pub fn n(&self) -> usize {
        self.a.len()
    }
}

/// Exhaustive minimum over all admissible `y`.
pub fn m_bound_bruteforce(q: &MBoundQuery) -> Result<BigUint> {
    if (q.target as usize) < q.n() {
        return Ok(BigUint::one());
    }
    let grid: u128 = q.a.iter().map(|&x| x as u128).product();
    if grid > BRUTE_FORCE_LIMIT {
        return Err(invalid(format!("brute force over {grid} vectors is out of scale")));
    }
    fn rec(a: &[u64], remaining: u64, prod: &BigUint, best: &mut Option<BigUint>) {
        match a.split_first() {
            None => {
                if remaining == 0 && best.as_ref().is_none_or(|b| prod < b) {
                    *best = Some(prod.clone());
                }
            }
            Some((&ai, rest)) => {
                for y in 1..=ai.min(remaining) {
                    rec(rest, remaining - y, &(prod * y), best);
                }
            }
        }
    }
    let mut best = None;
    rec(&q.a, q.target, &BigUint::one(), &mut best);
    Ok(best.expect("1 <= N <= sum a_i always admits a vector"))
}

pub fn m_bound(q: &MBoundQuery) -> BigUint {
    m_bound_with_witness(q).0
}

/// Value together with the lexicographically smallest minimizing vector
/// (`None` when `N < n`, where the value 1 is by convention).
///
/// Dynamic programme over suffixes: `best[i][s]` is the least product of
/// `y_i..y_n` summing to `s`.
pub fn m_bound_with_witness(q: &MBoundQuery) -> (BigUint, Option<Vec<u64>>) {
    let n = q.n();
    let target = q.target as usize;
    if target < n {
        return (BigUint::one(), None);
    }
    let mut best: Vec<Vec<Option<BigUint>>> = vec![vec![None; target + 1]; n + 1];
    best[n][0] = Some(BigUint::one());
    for i in (0..n).rev() {
        let (head, tail) = best.split_at_mut(i + 1);
        let next = &tail[0];
        for s in 0..=target {
            let mut cur: Option<BigUint> = None;
            for y in 1..=(q.a[i] as usize).min(s) {
                if let Some(rest) = &next[s - y] {
                    let cand = rest * y;
                    if cur.as_ref().is_none_or(|c| cand < *c) {
                        cur = Some(cand);
                    }
                }
            }
            head[i][s] = cur;
        }
    }
    let value = best[0][target].clone().expect("1 <= N <= sum a_i always admits a vector");
    let mut witness = Vec::with_capacity(n);
    let mut s = target;
    for i in 0..n {
        let want = best[i][s].as_ref().unwrap();
        let y = (1..=(q.a[i] as usize).min(s))
            .find(|&y| best[i + 1][s - y].as_ref().is_some_and(|rest| &(rest * y) == want))
            .expect("a minimizer extends");
        witness.push(y as u64);
        s -= y;
    }
    (value, Some(witness))
}

/// `m(a; N) >= 2`, which holds exactly when `N > n`.
pub fn pigeonhole_threshold(q: &MBoundQuery) -> bool {
    m_bound(q) >= BigUint::from(2u32)
}

/// The bound as used by the counting theorems: an argument below 1 makes the
/// statement vacuous and the bound is reported as 1 with `vacuous = true`.
pub fn m_bound_clamped(a: &[u64], target: i128) -> Result<(BigUint, bool)> {
    if target < 1 {
        return Ok((BigUint::one(), true));
    }
    Ok((m_bound(&MBoundQuery::new(a.to_vec(), target)?), false))
}

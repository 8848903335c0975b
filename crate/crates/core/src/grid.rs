//! Exhaustive walks over finite product grids `[0, r_1) x ... x [0, r_n)`.
//!
//! Points are numbered with the first coordinate varying fastest. The index
//! space is cut into fixed-size chunks that rayon processes independently;
//! counts are merged by summation and searches keep the smallest index, so
//! results do not depend on scheduling.

use rayon::prelude::*;

use crate::error::Result;
use crate::Budget;

const CHUNK: u128 = 1 << 12;

pub(crate) fn grid_size(radices: &[usize]) -> u128 {
    radices.iter().map(|&r| r as u128).product()
}

fn decode(mut idx: u128, radices: &[usize], digits: &mut [usize]) {
    for (d, &r) in digits.iter_mut().zip(radices) {
        *d = (idx % r as u128) as usize;
        idx /= r as u128;
    }
}

fn advance(radices: &[usize], digits: &mut [usize]) {
    for (d, &r) in digits.iter_mut().zip(radices) {
        *d += 1;
        if *d < r {
            return;
        }
        *d = 0;
    }
}

fn chunks(total: u128) -> impl IndexedParallelIterator<Item = (u128, u128)> {
    let n = total.div_ceil(CHUNK);
    (0..n as usize).into_par_iter().map(move |k| {
        let start = k as u128 * CHUNK;
        (start, (start + CHUNK).min(total))
    })
}

/// Number of grid points satisfying `pred`.
pub(crate) fn count_points<F>(radices: &[usize], budget: Budget, pred: F) -> Result<u128>
where
    F: Fn(&[usize]) -> bool + Sync,
{
    let total = grid_size(radices);
    budget.check(total)?;
    Ok(chunks(total)
        .map(|(start, end)| {
            let mut digits = vec![0; radices.len()];
            decode(start, radices, &mut digits);
            let mut hits = 0u128;
            for _ in start..end {
                if pred(&digits) {
                    hits += 1;
                }
                advance(radices, &mut digits);
            }
            hits
        })
        .sum())
}

/// The satisfying point of smallest index, if any.
pub(crate) fn find_first_point<F>(radices: &[usize], budget: Budget, pred: F) -> Result<Option<Vec<usize>>>
where
    F: Fn(&[usize]) -> bool + Sync,
{
    let total = grid_size(radices);
    budget.check(total)?;
    Ok(chunks(total).find_map_first(|(start, end)| {
        let mut digits = vec![0; radices.len()];
        decode(start, radices, &mut digits);
        for _ in start..end {
            if pred(&digits) {
                return Some(digits);
            }
            advance(radices, &mut digits);
        }
        None
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_every_point_once() {
        let radices = [3, 5, 7, 11];
        let n = count_points(&radices, Budget::default(), |_| true).unwrap();
        assert_eq!(n, 3 * 5 * 7 * 11);
        let even = count_points(&radices, Budget::default(), |d| d.iter().sum::<usize>() % 2 == 0).unwrap();
        let mut oracle = 0;
        for a in 0..3 {
            for b in 0..5 {
                for c in 0..7 {
                    for e in 0..11 {
                        oracle += ((a + b + c + e) % 2 == 0) as u128;
                    }
                }
            }
        }
        assert_eq!(even, oracle);
    }

    #[test]
    fn empty_and_degenerate_grids() {
        assert_eq!(count_points(&[], Budget::default(), |_| true).unwrap(), 1);
        assert_eq!(count_points(&[4, 0], Budget::default(), |_| true).unwrap(), 0);
    }

    #[test]
    fn first_point_spans_chunks() {
        let radices = [64, 64, 64];
        let hit = find_first_point(&radices, Budget::default(), |d| d[2] >= 5 && d[0] == 3).unwrap();
        assert_eq!(hit, Some(vec![3, 0, 5]));
        assert_eq!(find_first_point(&radices, Budget::default(), |_| false).unwrap(), None);
    }

    #[test]
    fn budget_refusal() {
        assert!(count_points(&[10, 10], Budget(99), |_| true).is_err());
    }
}

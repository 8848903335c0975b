use chainwarn::zerosum::{
    abelian_groups_of_order, binary_length, count_weighted_sums, count_weighted_sums_dp, davenport, egz_count,
    fat_davenport, little_d, plus_minus_davenport, subsequence_sum_counts, subsequence_sums, verify_fat_bound,
    weighted_davenport, AbelianGroup, GSequence, Target, WeightScheme,
};
use chainwarn::Budget;
use num_bigint::BigUint;
use proptest::prelude::*;

fn group(inv: &[u64]) -> AbelianGroup {
    AbelianGroup::new(inv.to_vec()).unwrap()
}

/// Longest sequence without a nonempty zero-sum subsequence, plus one, by
/// walking multisets and all their subsets.
fn davenport_oracle(g: &AbelianGroup) -> u64 {
    fn zero_sum_free(g: &AbelianGroup, seq: &[usize]) -> bool {
        let els = g.elements();
        (1u32..1 << seq.len()).all(|mask| {
            let s = (0..seq.len()).filter(|i| mask >> i & 1 == 1).fold(g.zero(), |acc, i| g.add(&acc, &els[seq[i]]));
            s != g.zero()
        })
    }
    fn longest(g: &AbelianGroup, seq: &mut Vec<usize>, from: usize) -> usize {
        let mut best = seq.len();
        for x in from..g.order() as usize {
            seq.push(x);
            if zero_sum_free(g, seq) {
                best = best.max(longest(g, seq, x));
            }
            seq.pop();
        }
        best
    }
    longest(g, &mut Vec::new(), 1) as u64 + 1
}

/// `#{a : sum a_i g_i in B}` by nested loops over the weight vectors.
fn weighted_oracle(g: &AbelianGroup, seq: &[Vec<u64>], weights: &[Vec<i64>], target: &[Vec<i64>]) -> u64 {
    let hit = |x: &[u64]| {
        x.iter()
            .zip(target)
            .zip(g.invariants())
            .all(|((&c, b), &n)| b.iter().any(|&y| y.rem_euclid(n as i64) as u64 == c))
    };
    let mut count = 0;
    let mut idx = vec![0usize; seq.len()];
    loop {
        let s = idx.iter().zip(weights).zip(seq).fold(g.zero(), |acc, ((&i, a), t)| g.add(&acc, &g.scale(a[i], t)));
        if hit(&s) {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return count;
            }
            idx[k] += 1;
            if idx[k] < weights[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn group_structure() {
    // partitions of the prime exponents: p(4) = 5, p(3) p(2) = 6
    assert_eq!(abelian_groups_of_order(16).len(), 5);
    assert_eq!(abelian_groups_of_order(72).len(), 6);
    assert_eq!(abelian_groups_of_order(30).len(), 1);
    assert_eq!(abelian_groups_of_order(1), vec![AbelianGroup::trivial()]);
    for n in 2..40u64 {
        for g in abelian_groups_of_order(n) {
            assert_eq!(g.order(), n);
            for i in 0..n as usize {
                assert_eq!(g.index_of(&g.element_at(i)), i);
            }
        }
    }
    assert!(AbelianGroup::new(vec![2, 3]).is_err());
    assert!(AbelianGroup::new(vec![1, 2]).is_err());
    assert_eq!(group(&[2, 4]).prime(), Some(2));
    assert_eq!(group(&[6]).prime(), None);
    // Z/n has one subgroup per divisor; Z/2 + Z/2 has five
    assert_eq!(group(&[12]).subgroups().unwrap().len(), 6);
    assert_eq!(group(&[2, 2]).subgroups().unwrap().len(), 5);
    for h in group(&[2, 4]).subgroups().unwrap() {
        let q = group(&[2, 4]).quotient(&h).unwrap();
        assert_eq!(q.order() * h.len() as u64, 8);
    }
}

#[test]
fn davenport_known_values() {
    let b = Budget::default();
    for n in 2..=20 {
        assert_eq!(davenport(&AbelianGroup::cyclic(n).unwrap(), b).unwrap(), n);
    }
    // rank two: D(Z/m + Z/n) = m + n - 1 for m | n
    for (m, n) in [(2, 2), (2, 4), (3, 3), (2, 6), (4, 4), (3, 6), (2, 8), (5, 5)] {
        assert_eq!(davenport(&group(&[m, n]), b).unwrap(), m + n - 1, "Z/{m} + Z/{n}");
    }
    // p-groups: D = d = 1 + sum (n_i - 1)
    for inv in [vec![2, 2, 2], vec![2, 2, 4], vec![2, 2, 2, 2], vec![3, 3, 3], vec![2, 2, 8]] {
        let g = group(&inv);
        assert_eq!(davenport(&g, b).unwrap(), little_d(&g), "{g}");
    }
    assert_eq!(davenport(&AbelianGroup::trivial(), b).unwrap(), 1);
    assert!(davenport(&group(&[2, 2, 2, 2, 2]), Budget(10)).is_err());
}

#[test]
fn davenport_against_oracle() {
    for n in 2..=8u64 {
        for g in abelian_groups_of_order(n) {
            assert_eq!(davenport(&g, Budget::default()).unwrap(), davenport_oracle(&g), "{g}");
        }
    }
}

#[test]
fn plus_minus_constant_of_cyclic_groups() {
    for n in 2..=32 {
        let g = AbelianGroup::cyclic(n).unwrap();
        assert_eq!(plus_minus_davenport(&g, Budget::default()).unwrap(), binary_length(n), "n = {n}");
    }
}

#[test]
fn weighted_constants() {
    let b = Budget::default();
    let g = group(&[4]);
    // D_A with A = {0, 1} is D, and target {0} is the plain constant
    assert_eq!(weighted_davenport(&g, &[0, 1], b).unwrap(), 4);
    assert_eq!(fat_davenport(&g, &[-1, 0, 1], &[vec![0]], b).unwrap(), 3);
    // a larger target only makes the constant smaller
    assert!(fat_davenport(&g, &[0, 1], &[vec![0], vec![1]], b).unwrap() <= 4);
    assert!(fat_davenport(&g, &[1, 2], &[vec![0]], b).is_err());
    assert!(fat_davenport(&g, &[0, 4], &[vec![0]], b).is_err());
    assert!(fat_davenport(&g, &[0, 1], &[vec![1]], b).is_err());
}

/// Invariants, sequence terms, weight sets and target sets.
type Case = (Vec<u64>, Vec<Vec<u64>>, Vec<Vec<i64>>, Vec<Vec<i64>>);

fn p_group_case() -> impl Strategy<Value = Case> {
    prop::sample::select(vec![vec![2], vec![4], vec![3], vec![2, 2], vec![2, 4], vec![3, 3], vec![5], vec![2, 2, 2]])
        .prop_flat_map(|inv| {
            let p = (2..).find(|d| inv[0] % d == 0).unwrap();
            let coords = inv.iter().map(|&n| 0..n).collect::<Vec<_>>();
            // weight sets: residues mod p kept distinct by drawing a subset of 0..p and lifting
            let lift = |p: u64| {
                (prop::sample::subsequence((0..p as i64).collect::<Vec<_>>(), 1..=p as usize), 0i64..3)
                    .prop_map(move |(s, k)| s.into_iter().map(|x| x + k * p as i64).collect::<Vec<i64>>())
            };
            let r = inv.len();
            (
                Just(inv),
                prop::collection::vec(coords, 1..6),
                prop::collection::vec(lift(p), 5),
                prop::collection::vec(lift(p), r),
            )
        })
        .prop_map(|(inv, seq, mut w, b)| {
            w.truncate(seq.len());
            (inv, seq, w, b)
        })
}

proptest! {
    #[test]
    fn weighted_counts_agree((inv, seq, w, b) in p_group_case()) {
        let g = group(&inv);
        let terms: Vec<Vec<i64>> = seq.iter().map(|t| t.iter().map(|&x| x as i64).collect()).collect();
        let s = GSequence::new(&g, &terms).unwrap();
        let scheme = WeightScheme::new(w.clone(), Target::Product(b.clone()));
        let oracle = weighted_oracle(&g, &seq, &w, &b);
        prop_assert_eq!(count_weighted_sums(&s, &scheme, false, Budget::default()).unwrap(), BigUint::from(oracle));
        prop_assert_eq!(count_weighted_sums_dp(&s, &scheme, false).unwrap(), oracle as u128);
    }

    #[test]
    fn fat_bound_holds((inv, seq, w, b) in p_group_case()) {
        let g = group(&inv);
        let terms: Vec<Vec<i64>> = seq.iter().map(|t| t.iter().map(|&x| x as i64).collect()).collect();
        let s = GSequence::new(&g, &terms).unwrap();
        let rep = verify_fat_bound(&s, &WeightScheme::new(w, Target::Product(b)), Budget::default()).unwrap();
        prop_assert!(rep.holds, "{:?}", rep);
    }

    #[test]
    fn egz_bound_holds((inv, seq, w, b) in p_group_case(), k in 0u32..2) {
        let g = group(&inv);
        let terms: Vec<Vec<i64>> = seq.iter().map(|t| t.iter().map(|&x| x as i64).collect()).collect();
        let s = GSequence::new(&g, &terms).unwrap();
        let w: Vec<Vec<i64>> = w.into_iter().map(|mut a| { if !a.contains(&0) { a[0] = 0; } a }).collect();
        let w: Vec<Vec<i64>> = w.into_iter().map(|a| {
            let p = g.prime().unwrap() as i64;
            let mut out: Vec<i64> = Vec::new();
            for x in a {
                if out.iter().all(|y| (x - y).rem_euclid(p) != 0) {
                    out.push(x);
                }
            }
            out
        }).collect();
        let rep = egz_count(&s, &WeightScheme::new(w, Target::Product(b)), k, Budget::default()).unwrap();
        prop_assert!(rep.holds, "{:?}", rep);
    }

    #[test]
    fn subsequence_sums_are_consistent(idx in prop::collection::vec(0usize..12, 0..8)) {
        let g = group(&[2, 6]);
        let s = GSequence::from_indices(&g, &idx);
        let counts = subsequence_sum_counts(&s);
        prop_assert_eq!(counts.iter().sum::<u128>(), 1u128 << idx.len());
        let seen = subsequence_sums(&s);
        prop_assert!(seen.iter().zip(&counts).all(|(&b, &c)| b == (c > 0)));
        // a sequence of length >= D always has a nonempty zero-sum subsequence
        if idx.len() as u64 >= davenport(&g, Budget::default()).unwrap() {
            prop_assert!(counts[0] >= 2);
        }
    }
}

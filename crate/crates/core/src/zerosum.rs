//! Zero-sum problems in finite abelian groups: Davenport constants (plain,
//! weighted, fat), weighted subsequence-sum counts, and the bounds the
//! counting theorems give for `p`-groups.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;

use crate::chainring::{make_chain_ring, RingSubset};
use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::mpoly::MPoly;
use crate::warning::{count_restricted_solutions, RestrictedSystem, VerificationReport};
use crate::Budget;

/// Largest group the sequence searches accept (sum sets are `u128` bitmasks).
pub const SEARCH_LIMIT: u64 = 128;

/// Memo entries the sequence searches may hold, whatever the budget says.
pub const STATE_LIMIT: u64 = 1 << 24;

/// Largest group whose subgroup lattice is enumerated (`u64` bitmasks).
pub const SUBGROUP_LIMIT: u64 = 64;

/// `Z/n_1 + ... + Z/n_r` with `1 < n_1 | n_2 | ... | n_r`; the empty list
/// is the trivial group.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianGroup {
    invariants: Vec<u64>,
}

pub type GroupElement = Vec<u64>;

impl AbelianGroup {
    pub fn new(invariants: Vec<u64>) -> Result<Self> {
        if invariants.is_empty() {
            return Err(invalid("a group needs at least one invariant factor (use trivial())"));
        }
        if invariants[0] < 2 {
            return Err(invalid("invariant factors must exceed 1"));
        }
        for w in invariants.windows(2) {
            if w[1] % w[0] != 0 {
                return Err(invalid(format!("{} does not divide {}", w[0], w[1])));
            }
        }
        if invariants.iter().try_fold(1u64, |acc, &n| acc.checked_mul(n)).is_none() {
            return Err(invalid("group order overflows"));
        }
        Ok(AbelianGroup { invariants })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn trivial() -> Self {
        AbelianGroup { invariants: vec![] }
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }
    pub fn order(&self) -> u64 {
        self.invariants.iter().product()
    }
    pub fn exponent(&self) -> u64 {
        self.invariants.last().copied().unwrap_or(1)
    }

    /// The prime `p` if the order is a power of `p` (and the group nontrivial).
    pub fn prime(&self) -> Option<u64> {
        let n = self.order();
        if n < 2 {
            return None;
        }
        let p = (2..=n).find(|d| n.is_multiple_of(*d))?;
        let mut m = n;
        while m.is_multiple_of(p) {
            m /= p;
        }
        (m == 1).then_some(p)
    }

    pub fn zero(&self) -> GroupElement {
        vec![0; self.rank()]
    }

    pub fn reduce(&self, coords: &[i64]) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::DimensionMismatch { expected: self.rank(), actual: coords.len() });
        }
        Ok(coords.iter().zip(&self.invariants).map(|(&c, &n)| c.rem_euclid(n as i64) as u64).collect())
    }

    pub fn add(&self, a: &[u64], b: &[u64]) -> GroupElement {
        a.iter().zip(b).zip(&self.invariants).map(|((x, y), n)| (x + y) % n).collect()
    }

    pub fn scale(&self, k: i64, a: &[u64]) -> GroupElement {
        a.iter()
            .zip(&self.invariants)
            .map(|(&x, &n)| ((k.rem_euclid(n as i64) as u128 * x as u128) % n as u128) as u64)
            .collect()
    }

    /// Position in [`AbelianGroup::elements`] (first coordinate fastest).
    pub fn index_of(&self, a: &[u64]) -> usize {
        a.iter().zip(&self.invariants).rev().fold(0usize, |acc, (&x, &n)| acc * n as usize + x as usize)
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        self.invariants
            .iter()
            .map(|&n| {
                let x = (idx % n as usize) as u64;
                idx /= n as usize;
                x
            })
            .collect()
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order() as usize).map(|i| self.element_at(i)).collect()
    }

    /// Invariant factors of `self / H` for a subgroup given by its element indices.
    pub fn quotient(&self, subgroup: &[usize]) -> Result<AbelianGroup> {
        let order = self.order();
        let h = subgroup.len() as u64;
        if h == 0 || !order.is_multiple_of(h) {
            return Err(invalid("not a subgroup"));
        }
        let q = order / h;
        if q == 1 {
            return Ok(AbelianGroup::trivial());
        }
        let members: std::collections::HashSet<usize> = subgroup.iter().copied().collect();
        let els = self.elements();
        // #{x in G/H : kx = 0} = #{g : kg in H} / #H. For a p-part
        // Z/p^a_1 + ... this is prod p^min(e, a_i) at k = p^e, so the
        // ratios of consecutive values count the a_i that are >= e.
        let kernel = |k: u64| -> u64 {
            els.iter().filter(|g| members.contains(&self.index_of(&self.scale(k as i64, g)))).count() as u64 / h
        };
        let mut parts: Vec<(u64, Vec<u32>)> = Vec::new();
        let mut rest = q;
        let mut p = 2;
        while rest > 1 {
            if rest.is_multiple_of(p) {
                while rest.is_multiple_of(p) {
                    rest /= p;
                }
                let mut at_least = Vec::new();
                let mut prev = 1u64;
                for e in 1.. {
                    let c = kernel(p.pow(e));
                    if c == prev {
                        break;
                    }
                    at_least.push((c / prev).ilog(p));
                    prev = c;
                }
                let mut exps = Vec::new();
                for (i, &m) in at_least.iter().enumerate() {
                    let next = at_least.get(i + 1).copied().unwrap_or(0);
                    exps.extend(std::iter::repeat_n(i as u32 + 1, (m - next) as usize));
                }
                exps.sort_unstable_by(|a, b| b.cmp(a));
                parts.push((p, exps));
            }
            p += 1;
        }
        let rank = parts.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
        let mut invariants: Vec<u64> =
            (0..rank).map(|k| parts.iter().map(|(p, e)| e.get(k).map_or(1, |&a| p.pow(a))).product()).collect();
        invariants.reverse();
        AbelianGroup::new(invariants)
    }

    /// All subgroups, each as a sorted list of element indices. Requires `#G <= SUBGROUP_LIMIT`.
    pub fn subgroups(&self) -> Result<Vec<Vec<usize>>> {
        let n = self.order();
        if n > SUBGROUP_LIMIT {
            return Err(invalid(format!("subgroup enumeration needs #G <= {SUBGROUP_LIMIT}")));
        }
        let els = self.elements();
        let closure = |mut mask: u64| -> u64 {
            loop {
                let mut next = mask;
                for (i, a) in els.iter().enumerate() {
                    if mask >> i & 1 == 0 {
                        continue;
                    }
                    for (j, b) in els.iter().enumerate() {
                        if mask >> j & 1 == 1 {
                            next |= 1 << self.index_of(&self.add(a, b));
                        }
                    }
                }
                if next == mask {
                    return mask;
                }
                mask = next;
            }
        };
        let mut seen = vec![1u64];
        let mut frontier = vec![1u64];
        while let Some(h) = frontier.pop() {
            for g in 0..n as usize {
                if h >> g & 1 == 0 {
                    let k = closure(h | 1 << g);
                    if !seen.contains(&k) {
                        seen.push(k);
                        frontier.push(k);
                    }
                }
            }
        }
        seen.sort_by_key(|m| (m.count_ones(), *m));
        Ok(seen.into_iter().map(|m| (0..n as usize).filter(|i| m >> i & 1 == 1).collect()).collect())
    }
}

/// Every abelian group of order `n`, sorted by invariant-factor vector.
pub fn abelian_groups_of_order(n: u64) -> Vec<AbelianGroup> {
    // Choose n_r, n_{r-1}, ... from the top; each factor divides the one above it.
    fn rec(remaining: u64, cap: u64, acc: &mut Vec<u64>, out: &mut Vec<AbelianGroup>) {
        if remaining == 1 {
            out.push(AbelianGroup { invariants: acc.iter().rev().copied().collect() });
            return;
        }
        for d in 2..=cap.min(remaining) {
            if remaining.is_multiple_of(d) && cap.is_multiple_of(d) {
                acc.push(d);
                rec(remaining / d, d, acc, out);
                acc.pop();
            }
        }
    }
    if n <= 1 {
        return vec![AbelianGroup::trivial()];
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out.sort();
    out
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.invariants.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.invariants.iter().map(|n| format!("Z/{n}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// `d(G) = 1 + sum (n_i - 1)`.
pub fn little_d(g: &AbelianGroup) -> u64 {
    1 + g.invariants.iter().map(|n| n - 1).sum::<u64>()
}

/// A finite sequence of elements of a group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GSequence {
    group: AbelianGroup,
    terms: Vec<GroupElement>,
}

impl GSequence {
    pub fn new(group: &AbelianGroup, terms: &[Vec<i64>]) -> Result<Self> {
        let terms = terms.iter().map(|t| group.reduce(t)).collect::<Result<_>>()?;
        Ok(GSequence { group: group.clone(), terms })
    }

    /// Builds a sequence from element indices.
    pub fn from_indices(group: &AbelianGroup, indices: &[usize]) -> Self {
        GSequence { group: group.clone(), terms: indices.iter().map(|&i| group.element_at(i)).collect() }
    }

    /// Parses `"1,0;0,1"` (terms separated by `;`, coordinates by `,`).
    pub fn parse(group: &AbelianGroup, text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(GSequence { group: group.clone(), terms: vec![] });
        }
        let terms = text
            .split(';')
            .map(|t| {
                t.split(',')
                    .map(|c| c.trim().parse::<i64>().map_err(|e| Error::Parse(format!("{c:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, &terms)
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }
    pub fn terms(&self) -> &[GroupElement] {
        &self.terms
    }
    pub fn len(&self) -> usize {
        self.terms.len()
    }
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for GSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.terms.iter().map(|t| t.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Where weighted sums must land.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Elements(Vec<GroupElement>),
    /// `B = B_1 x ... x B_r`, one residue set per coordinate.
    Product(Vec<Vec<i64>>),
}

/// Integer weight sets `A_1..A_n` (one per sequence position) and a target `B`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightScheme {
    pub weights: Vec<Vec<i64>>,
    pub target: Target,
}

impl WeightScheme {
    pub fn new(weights: Vec<Vec<i64>>, target: Target) -> Self {
        WeightScheme { weights, target }
    }

    /// The same weight set at each of `n` positions.
    pub fn uniform(a: &[i64], n: usize, target: Target) -> Self {
        WeightScheme { weights: vec![a.to_vec(); n], target }
    }

    /// Plain subsequences: weights `{0, 1}` everywhere.
    pub fn subsequences(n: usize, target: Target) -> Self {
        Self::uniform(&[0, 1], n, target)
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: self.weights.len() });
        }
        for a in &self.weights {
            check_weight_set(a)?;
        }
        Ok(())
    }
}

fn check_weight_set(a: &[i64]) -> Result<()> {
    if a.is_empty() {
        return Err(invalid("empty weight set"));
    }
    for (i, x) in a.iter().enumerate() {
        if a[..i].contains(x) {
            return Err(invalid(format!("duplicate weight {x}")));
        }
    }
    Ok(())
}

/// Membership table of the target, indexed like [`AbelianGroup::elements`].
pub fn target_mask(group: &AbelianGroup, target: &Target) -> Result<Vec<bool>> {
    let mut mask = vec![false; group.order() as usize];
    match target {
        Target::Elements(els) => {
            if els.is_empty() {
                return Err(invalid("empty target set"));
            }
            for e in els {
                let r = group.reduce(&e.iter().map(|&c| c as i64).collect::<Vec<_>>())?;
                mask[group.index_of(&r)] = true;
            }
        }
        Target::Product(sets) => {
            if sets.len() != group.rank() {
                return Err(Error::DimensionMismatch { expected: group.rank(), actual: sets.len() });
            }
            if sets.iter().any(|s| s.is_empty()) {
                return Err(invalid("empty coordinate target"));
            }
            for (idx, x) in group.elements().iter().enumerate() {
                mask[idx] = x
                    .iter()
                    .zip(sets)
                    .zip(&group.invariants)
                    .all(|((&c, s), &n)| s.iter().any(|&b| b.rem_euclid(n as i64) as u64 == c));
            }
        }
    }
    Ok(mask)
}

/// `#{a in A_1 x ... x A_n : sum a_i g_i in B}` by walking every weight
/// vector. With `exclude_empty`, the all-zero weight vector is not counted.
pub fn count_weighted_sums(g: &GSequence, w: &WeightScheme, exclude_empty: bool, budget: Budget) -> Result<BigUint> {
    w.validate(g.len())?;
    let group = &g.group;
    let mask = target_mask(group, &w.target)?;
    let scaled: Vec<Vec<GroupElement>> =
        w.weights.iter().zip(&g.terms).map(|(a, t)| a.iter().map(|&k| group.scale(k, t)).collect()).collect();
    let radices: Vec<usize> = w.weights.iter().map(|a| a.len()).collect();
    let n = grid::count_points(&radices, budget, |d| {
        if exclude_empty && d.iter().zip(&w.weights).all(|(&k, a)| a[k] == 0) {
            return false;
        }
        let mut s = group.zero();
        for (&k, opts) in d.iter().zip(&scaled) {
            s = group.add(&s, &opts[k]);
        }
        mask[group.index_of(&s)]
    })?;
    Ok(BigUint::from(n))
}

/// Number of weight vectors giving each group element as `sum a_i g_i`,
/// by convolving one position at a time.
pub fn weighted_sum_distribution(g: &GSequence, weights: &[Vec<i64>]) -> Result<Vec<u128>> {
    if weights.len() != g.len() {
        return Err(Error::DimensionMismatch { expected: g.len(), actual: weights.len() });
    }
    let group = &g.group;
    let order = group.order() as usize;
    let els = group.elements();
    let mut dist = vec![0u128; order];
    dist[0] = 1;
    for (a, t) in weights.iter().zip(&g.terms) {
        check_weight_set(a)?;
        let shifts: Vec<GroupElement> = a.iter().map(|&k| group.scale(k, t)).collect();
        let mut next = vec![0u128; order];
        for (x, &c) in dist.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for s in &shifts {
                next[group.index_of(&group.add(&els[x], s))] += c;
            }
        }
        dist = next;
    }
    Ok(dist)
}

/// `N_A^B` from [`weighted_sum_distribution`].
pub fn count_weighted_sums_dp(g: &GSequence, w: &WeightScheme, exclude_empty: bool) -> Result<u128> {
    w.validate(g.len())?;
    let mask = target_mask(&g.group, &w.target)?;
    let dist = weighted_sum_distribution(g, &w.weights)?;
    let mut n: u128 = dist.iter().zip(&mask).filter(|(_, &m)| m).map(|(c, _)| c).sum();
    if exclude_empty && mask[0] && w.weights.iter().all(|a| a.contains(&0)) {
        n -= 1;
    }
    Ok(n)
}

/// Search tables for sequences avoiding `B` with weights `A`.
struct FreeSearch {
    order: usize,
    add: Vec<Vec<u8>>,
    /// `a g` for every nonzero weight `a`, per element `g`.
    multiples: Vec<Vec<u8>>,
    forbidden: u128,
    free: u32,
    memo: HashMap<(u128, u8), u32>,
    states: u64,
    budget: u64,
}

impl FreeSearch {
    fn new(group: &AbelianGroup, a: &[i64], forbidden: &[bool], budget: Budget) -> Self {
        let els = group.elements();
        let add = els.iter().map(|x| els.iter().map(|y| group.index_of(&group.add(x, y)) as u8).collect()).collect();
        let multiples = els
            .iter()
            .map(|x| {
                let mut m: Vec<u8> =
                    a.iter().filter(|&&k| k != 0).map(|&k| group.index_of(&group.scale(k, x)) as u8).collect();
                m.sort_unstable();
                m.dedup();
                m
            })
            .collect();
        let forbidden_mask = forbidden.iter().enumerate().filter(|(_, &b)| b).fold(0u128, |m, (i, _)| m | 1u128 << i);
        FreeSearch {
            order: els.len(),
            add,
            multiples,
            forbidden: forbidden_mask,
            free: (els.len() - forbidden_mask.count_ones() as usize) as u32,
            memo: HashMap::new(),
            states: 0,
            budget: budget.0.min(STATE_LIMIT),
        }
    }

    fn translate(&self, mask: u128, h: u8) -> u128 {
        let row = &self.add;
        let mut out = 0u128;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            out |= 1u128 << row[i][h as usize];
            m &= m - 1;
        }
        out
    }

    /// Sums of nonzero weight vectors after appending `g`.
    fn extend(&self, sums: u128, g: usize) -> u128 {
        let mut out = sums;
        for &h in &self.multiples[g] {
            out |= self.translate(sums, h) | 1u128 << h;
        }
        out
    }

    /// Longest extension of a sequence whose last element has index `last`
    /// and whose nonzero weighted sums are `sums`. The sum set grows with
    /// every appended term, so `free - |sums|` caps the answer.
    fn longest(&mut self, sums: u128, last: usize) -> Result<u32> {
        if let Some(&v) = self.memo.get(&(sums, last as u8)) {
            return Ok(v);
        }
        self.states += 1;
        if self.states > self.budget {
            return Err(Error::BudgetExceeded { required: self.states as u128, budget: self.budget });
        }
        let cap = self.free - sums.count_ones();
        let mut best = 0;
        for g in last..self.order {
            if best >= cap {
                break;
            }
            let next = self.extend(sums, g);
            if next & self.forbidden != 0 {
                continue;
            }
            best = best.max(1 + self.longest(next, g)?);
        }
        self.memo.insert((sums, last as u8), best);
        Ok(best)
    }
}

/// `D_A^B(G)`: the least `n` such that every length-`n` sequence has a
/// nonzero `A`-weighted subsequence with sum in `B`. Sequences are searched
/// as multisets. `budget` caps the number of distinct search states
/// (never more than [`STATE_LIMIT`]).
pub fn fat_davenport(group: &AbelianGroup, a: &[i64], b: &[GroupElement], budget: Budget) -> Result<u64> {
    check_weight_set(a)?;
    if group.order() > SEARCH_LIMIT {
        return Err(invalid(format!("sequence search needs #G <= {SEARCH_LIMIT}, got {}", group.order())));
    }
    if !a.contains(&0) {
        return Err(Error::Hypothesis("the weight set must contain 0".into()));
    }
    if group.order() > 1 && !a.iter().any(|k| k.rem_euclid(group.exponent() as i64) != 0) {
        return Err(Error::Hypothesis(format!("every weight is divisible by exp G = {}", group.exponent())));
    }
    let mask = target_mask(group, &Target::Elements(b.to_vec()))?;
    if !mask[0] {
        return Err(Error::Hypothesis("the target must contain 0".into()));
    }
    let mut search = FreeSearch::new(group, a, &mask, budget);
    let longest = search.longest(0, 0)?;
    crate::charge(search.states as u128);
    Ok(longest as u64 + 1)
}

/// `D(G)`, with `D` of the trivial group taken to be 1.
pub fn davenport(group: &AbelianGroup, budget: Budget) -> Result<u64> {
    if group.order() == 1 {
        return Ok(1);
    }
    fat_davenport(group, &[0, 1], &[group.zero()], budget)
}

/// `D_A(G)`, the weighted constant with target `{0}`.
pub fn weighted_davenport(group: &AbelianGroup, a: &[i64], budget: Budget) -> Result<u64> {
    fat_davenport(group, a, &[group.zero()], budget)
}

/// `D_±(G)`: weights `{-1, 0, 1}`, target `{0}`.
pub fn plus_minus_davenport(group: &AbelianGroup, budget: Budget) -> Result<u64> {
    if group.order() == 1 {
        return Ok(1);
    }
    weighted_davenport(group, &[-1, 0, 1], budget)
}

/// `floor(log2 n) + 1`.
pub fn binary_length(n: u64) -> u64 {
    n.ilog2() as u64 + 1
}

/// Membership table of `Σ(g)`, the sums over all subsets of positions
/// (the empty subset included).
pub fn subsequence_sums(g: &GSequence) -> Vec<bool> {
    let group = &g.group;
    let els = group.elements();
    let mut seen = vec![false; els.len()];
    seen[0] = true;
    for t in &g.terms {
        let shifted: Vec<usize> =
            (0..els.len()).filter(|&i| seen[i]).map(|i| group.index_of(&group.add(&els[i], t))).collect();
        for i in shifted {
            seen[i] = true;
        }
    }
    seen
}

/// `N^x(g)` for every `x`, indexed like [`AbelianGroup::elements`]
/// (plain subsequences, the empty one included).
pub fn subsequence_sum_counts(g: &GSequence) -> Vec<u128> {
    let weights = vec![vec![0, 1]; g.len()];
    weighted_sum_distribution(g, &weights).expect("weights {0,1} match the sequence length")
}

/// For a `p`-group: exponents `v_j` with `n_j = p^{v_j}`.
fn p_group_exponents(group: &AbelianGroup) -> Result<(u64, Vec<u32>)> {
    let p = group.prime().ok_or_else(|| Error::Hypothesis(format!("{group} is not a p-group")))?;
    Ok((p, group.invariants.iter().map(|&n| n.ilog(p)).collect()))
}

fn check_incongruent(sets: &[Vec<i64>], p: u64, what: &str) -> Result<()> {
    for s in sets {
        let residues: Vec<i64> = s.iter().map(|x| x.rem_euclid(p as i64)).collect();
        for (i, r) in residues.iter().enumerate() {
            if residues[..i].contains(r) {
                return Err(Error::Hypothesis(format!("{what} {s:?} has two elements congruent mod {p}")));
            }
        }
    }
    Ok(())
}

/// `sum #A_i - sum_j (p^{v_j} - #B_j)`.
fn fat_bound_argument(group: &AbelianGroup, weights: &[Vec<i64>], b: &[Vec<i64>]) -> i128 {
    let a: i128 = weights.iter().map(|s| s.len() as i128).sum();
    let cost: i128 = group.invariants.iter().zip(b).map(|(&n, s)| n as i128 - s.len() as i128).sum();
    a - cost
}

/// Weighted sums landing in `B = prod B_j` for a sequence in the `p`-group
/// `G = sum Z/p^{v_j}`, counted through the polynomial system
/// `f_j = sum_i g_i^{(j)} t_i` over `Z/p^{v_r}` and cross-checked against
/// [`count_weighted_sums_dp`]. The report's bound is
/// `m(#A_1..#A_n; sum #A_i - sum_j (p^{v_j} - #B_j))`.
pub fn verify_fat_bound(g: &GSequence, w: &WeightScheme, budget: Budget) -> Result<VerificationReport> {
    w.validate(g.len())?;
    let group = &g.group;
    let (p, exps) = p_group_exponents(group)?;
    let Target::Product(b_sets) = &w.target else {
        return Err(invalid("the bound needs a per-coordinate target B_1 x ... x B_r"));
    };
    if b_sets.len() != group.rank() {
        return Err(Error::DimensionMismatch { expected: group.rank(), actual: b_sets.len() });
    }
    if g.is_empty() {
        return Err(invalid("the sequence must be nonempty"));
    }
    check_incongruent(&w.weights, p, "weight set")?;
    check_incongruent(b_sets, p, "target set")?;
    let v = *exps.last().unwrap();
    let ring = make_chain_ring(p, 1, v)?;
    let n = g.len();
    let inputs = w
        .weights
        .iter()
        .map(|a| RingSubset::from_ints(&ring, &a.iter().map(|&x| x as i128).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let outputs = b_sets
        .iter()
        .map(|b| RingSubset::from_ints(&ring, &b.iter().map(|&x| x as i128).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let polys = (0..group.rank())
        .map(|j| {
            let terms = g
                .terms
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let mut e = vec![0; n];
                    e[i] = 1;
                    (e, ring.from_int(t[j] as i128))
                })
                .collect();
            MPoly::from_terms(&ring, n, terms)
        })
        .collect::<Result<Vec<_>>>()?;
    let sys = RestrictedSystem::new(&ring, inputs, polys, exps, outputs)?;
    let count = count_restricted_solutions(&sys, budget)?;
    let direct = count_weighted_sums_dp(g, w, false)?;
    if count != BigUint::from(direct) {
        return Err(Error::Internal(format!(
            "weighted-sum count {direct} differs from the polynomial-system count {count} for {g}"
        )));
    }
    let sizes: Vec<u64> = w.weights.iter().map(|a| a.len() as u64).collect();
    VerificationReport::new(count, &sizes, fat_bound_argument(group, &w.weights, b_sets))
}

/// Weight vectors with sum in `B = prod B_j` whose support size is divisible
/// by `p^k`, against the bound
/// `m(#A..; sum #A_i - sum_j (p^{v_j} - #B_j) - (a_M - 1)(p^k - 1))`.
pub fn egz_count(g: &GSequence, w: &WeightScheme, k: u32, budget: Budget) -> Result<VerificationReport> {
    w.validate(g.len())?;
    let group = &g.group;
    let (p, _) = p_group_exponents(group)?;
    let Target::Product(b_sets) = &w.target else {
        return Err(invalid("the bound needs a per-coordinate target B_1 x ... x B_r"));
    };
    if w.weights.iter().any(|a| !a.contains(&0)) {
        return Err(Error::Hypothesis("every weight set must contain 0".into()));
    }
    check_incongruent(&w.weights, p, "weight set")?;
    check_incongruent(b_sets, p, "target set")?;
    let mask = target_mask(group, &w.target)?;
    let modulus = p.checked_pow(k).ok_or_else(|| invalid("p^k overflows"))? as usize;
    let scaled: Vec<Vec<GroupElement>> =
        w.weights.iter().zip(&g.terms).map(|(a, t)| a.iter().map(|&c| group.scale(c, t)).collect()).collect();
    let radices: Vec<usize> = w.weights.iter().map(|a| a.len()).collect();
    let count = grid::count_points(&radices, budget, |d| {
        let support = d.iter().zip(&w.weights).filter(|(&i, a)| a[i] != 0).count();
        if support % modulus != 0 {
            return false;
        }
        let mut s = group.zero();
        for (&i, opts) in d.iter().zip(&scaled) {
            s = group.add(&s, &opts[i]);
        }
        mask[group.index_of(&s)]
    })?;
    let a_max = w.weights.iter().map(|a| a.len()).max().unwrap_or(1) as i128;
    let arg = fat_bound_argument(group, &w.weights, b_sets) - (a_max - 1) * (modulus as i128 - 1);
    let sizes: Vec<u64> = w.weights.iter().map(|a| a.len() as u64).collect();
    VerificationReport::new(BigUint::from(count), &sizes, arg)
}

/// `2^e` as an exact fraction `(numerator, denominator)`.
pub fn pow2_fraction(e: i64) -> (BigUint, BigUint) {
    let one = BigUint::from(1u32);
    if e >= 0 {
        (one << e as usize, BigUint::from(1u32))
    } else {
        (one.clone(), one << (-e) as usize)
    }
}

/// `lhs >= c * 2^e` in exact arithmetic.
pub fn at_least_scaled_pow2(lhs: &BigUint, c: u64, e: i64) -> bool {
    let (num, den) = pow2_fraction(e);
    lhs * den >= BigUint::from(c) * num
}

/// `gcd` over `u64`, re-exported for callers building cyclic examples.
pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

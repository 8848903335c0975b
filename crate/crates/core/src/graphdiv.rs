//! Hypergraph union counts and divisible subgraphs of multigraphs, both
//! reduced to restricted-variable counting or to subsequence sums in a
//! finite abelian group.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::chainring::{is_prime, make_chain_ring, RingSubset};
use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::mpoly::MPoly;
use crate::warning::{count_restricted_solutions, RestrictedSystem, VerificationReport};
use crate::zerosum::{
    count_weighted_sums, count_weighted_sums_dp, AbelianGroup, GSequence, GroupElement, Target, WeightScheme,
};
use crate::Budget;

/// A finite sequence of finite subsets of `{0, .., ground - 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    ground: usize,
    sets: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// The ground set is taken to be `0..=max element`.
    pub fn new(sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.is_empty() {
            return Err(invalid("a hypergraph needs at least one set"));
        }
        let sets: Vec<Vec<usize>> = sets
            .into_iter()
            .map(|mut s| {
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        let ground = sets.iter().flatten().max().map_or(0, |&m| m + 1);
        Ok(Hypergraph { ground, sets })
    }

    /// Parses `"1,2;2,3;4"` (sets separated by `;`). An empty set is written as nothing.
    pub fn parse(text: &str) -> Result<Self> {
        let sets = text
            .split(';')
            .map(|part| {
                part.split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sets)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }
    pub fn ground_size(&self) -> usize {
        self.ground
    }

    /// Largest number of sets sharing one ground element.
    pub fn max_degree(&self) -> usize {
        self.memberships().iter().map(Vec::len).max().unwrap_or(0)
    }

    /// For every ground element, the indices of the sets containing it.
    fn memberships(&self) -> Vec<Vec<usize>> {
        let mut m = vec![Vec::new(); self.ground];
        for (i, s) in self.sets.iter().enumerate() {
            for &x in s {
                m[x].push(i);
            }
        }
        m
    }

    fn bitsets(&self) -> Vec<Vec<u64>> {
        let words = self.ground.div_ceil(64);
        self.sets
            .iter()
            .map(|s| {
                let mut b = vec![0u64; words];
                for &x in s {
                    b[x / 64] |= 1 << (x % 64);
                }
                b
            })
            .collect()
    }

    /// `#(union of the sets selected by `pick`)`.
    pub fn union_size(&self, pick: &[bool]) -> usize {
        let mut seen = vec![false; self.ground];
        for (s, &on) in self.sets.iter().zip(pick) {
            if on {
                for &x in s {
                    seen[x] = true;
                }
            }
        }
        seen.iter().filter(|&&b| b).count()
    }

    /// The inclusion-exclusion polynomial `h` over `ring`: on `{0,1}^n`,
    /// `h(x)` is the size of the union of the selected sets. Each ground
    /// element in sets `S` contributes `1 - prod_{i in S} (1 - t_i)`.
    pub fn union_polynomial(&self, ring: &crate::chainring::ChainRing) -> Result<MPoly> {
        let n = self.len();
        let mut terms = Vec::new();
        for s in self.memberships() {
            for mask in 1u64..1 << s.len() {
                let mut e = vec![0u32; n];
                for (k, &i) in s.iter().enumerate() {
                    if mask >> k & 1 == 1 {
                        e[i] = 1;
                    }
                }
                let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
                terms.push((e, ring.from_int(sign)));
            }
        }
        MPoly::from_terms(ring, n, terms)
    }
}

impl fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.sets.iter().map(|s| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// `m = p^v` with `p` prime.
fn prime_power(m: u64) -> Option<(u64, u32)> {
    if m < 2 {
        return None;
    }
    let p = (2..=m).find(|d| m.is_multiple_of(*d))?;
    let mut v = 0;
    let mut rest = m;
    while rest.is_multiple_of(p) {
        rest /= p;
        v += 1;
    }
    (rest == 1 && is_prime(p)).then_some((p, v))
}

fn residues(set: &[i64], m: u64) -> Result<Vec<i64>> {
    if set.is_empty() {
        return Err(invalid("empty residue set"));
    }
    let mut out: Vec<i64> = set.iter().map(|b| b.rem_euclid(m as i64)).collect();
    out.sort_unstable();
    let before = out.len();
    out.dedup();
    if out.len() != before {
        return Err(invalid(format!("{set:?} repeats a residue mod {m}")));
    }
    Ok(out)
}

/// Result of [`hypergraph_count`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypergraphCount {
    /// `#{J : #(union F_J) in B mod m}`, the empty `J` included.
    pub count: BigUint,
    /// The same with `J` nonempty.
    pub nonempty: BigUint,
    /// The count through the inclusion-exclusion polynomial, when `m = p^v`
    /// and `B` is pairwise incongruent mod `p`.
    pub polynomial_count: Option<BigUint>,
    /// `count` against `m(2,..,2; 2n - d(p^v - #B)) = 2^{n - d(p^v - #B)}`.
    pub report: Option<VerificationReport>,
    /// `0 in B` and `n > d(p^v - #B)`, so some nonempty `J` must qualify.
    pub nonempty_forced: bool,
}

impl HypergraphCount {
    pub fn holds(&self) -> bool {
        self.report.as_ref().is_none_or(|r| r.holds) && (!self.nonempty_forced || self.nonempty > BigUint::ZERO)
    }
}

/// `N_F(m, B)` by walking all `2^n` subfamilies, cross-checked against the
/// polynomial count when the bound applies.
pub fn hypergraph_count(h: &Hypergraph, m: u64, b: &[i64], budget: Budget) -> Result<HypergraphCount> {
    if m == 0 {
        return Err(invalid("m must be positive"));
    }
    let b = residues(b, m)?;
    let n = h.len();
    let bits = h.bitsets();
    let words = h.ground.div_ceil(64);
    let hits = |d: &[usize]| {
        let mut acc = vec![0u64; words];
        for (on, s) in d.iter().zip(&bits) {
            if *on == 1 {
                for (a, w) in acc.iter_mut().zip(s) {
                    *a |= w;
                }
            }
        }
        let size: u64 = acc.iter().map(|w| w.count_ones() as u64).sum();
        b.binary_search(&((size % m) as i64)).is_ok()
    };
    let radices = vec![2; n];
    let count = grid::count_points(&radices, budget, hits)?;
    let empty_hits = b.contains(&0);
    let nonempty = count - empty_hits as u128;

    let mut out = HypergraphCount {
        count: count.into(),
        nonempty: nonempty.into(),
        polynomial_count: None,
        report: None,
        nonempty_forced: false,
    };
    let Some((p, v)) = prime_power(m) else {
        return Ok(out);
    };
    let incongruent = b.iter().enumerate().all(|(i, x)| b[..i].iter().all(|y| (x - y) % p as i64 != 0));
    if !incongruent {
        return Ok(out);
    }
    let ring = make_chain_ring(p, 1, v)?;
    let poly = h.union_polynomial(&ring)?;
    let inputs = vec![RingSubset::from_ints(&ring, &[0, 1])?; n];
    let outputs = vec![RingSubset::from_ints(&ring, &b.iter().map(|&x| x as i128).collect::<Vec<_>>())?];
    let sys = RestrictedSystem::new(&ring, inputs, vec![poly], vec![v], outputs)?;
    let via_poly = count_restricted_solutions(&sys, budget)?;
    if via_poly != out.count {
        return Err(Error::Internal(format!(
            "union count {} differs from the inclusion-exclusion count {via_poly} for {h}",
            out.count
        )));
    }
    let cost = h.max_degree() as i128 * (m as i128 - b.len() as i128);
    out.polynomial_count = Some(via_poly);
    out.report = Some(VerificationReport::new(out.count.clone(), &vec![2; n], 2 * n as i128 - cost)?);
    out.nonempty_forced = empty_hits && n as i128 > cost;
    Ok(out)
}

/// The family `{A_ij u V_i}` (`1 <= i <= m - b`, `1 <= j <= d`) with
/// `#A_ij = m`, `#V_i = a`, all pairwise disjoint, and the residue set
/// `B = {m, m - a, .., m - (b-1)a}` mod `m`. No nonempty subfamily has
/// union size in `B`.
pub fn schmitt_construction(b: u64, d: u64, m: u64, a: u64) -> Result<(Hypergraph, Vec<i64>)> {
    if b < 1 || d < 1 || a < 1 {
        return Err(Error::Hypothesis("b, d and a must be positive".into()));
    }
    if m <= b {
        return Err(Error::Hypothesis(format!("need m > b, got m = {m}, b = {b}")));
    }
    if a.gcd(&m) != 1 {
        return Err(Error::Hypothesis(format!("gcd({a}, {m}) != 1")));
    }
    let rows = (m - b) as usize;
    let mut next = 0usize;
    let mut take = |k: u64| -> Vec<usize> {
        let s = (next..next + k as usize).collect();
        next += k as usize;
        s
    };
    let vs: Vec<Vec<usize>> = (0..rows).map(|_| take(a)).collect();
    let mut sets = Vec::with_capacity(rows * d as usize);
    for v in &vs {
        for _ in 0..d {
            let mut s = take(m);
            s.extend(v);
            sets.push(s);
        }
    }
    let targets = (0..b).map(|k| (m as i64 - (k * a) as i64).rem_euclid(m as i64)).collect();
    Ok((Hypergraph::new(sets)?, targets))
}

/// How a loop contributes to the degree of its vertex.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopConvention {
    /// A loop adds 2.
    #[default]
    Topologist,
    /// A loop adds 1.
    Algebraist,
}

/// A multigraph on vertices `1..=r`; edges are unordered pairs, loops allowed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiGraph {
    r: usize,
    edges: Vec<(usize, usize)>,
    convention: LoopConvention,
}

impl MultiGraph {
    pub fn new(r: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if r == 0 {
            return Err(invalid("a graph needs at least one vertex"));
        }
        for &(u, v) in &edges {
            if u < 1 || u > r || v < 1 || v > r {
                return Err(invalid(format!("edge {u}-{v} leaves the vertex set 1..={r}")));
            }
        }
        let edges = edges.into_iter().map(|(u, v)| (u.min(v), u.max(v))).collect();
        Ok(MultiGraph { r, edges, convention: LoopConvention::Topologist })
    }

    pub fn with_convention(mut self, convention: LoopConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Parses `"1-2,2-3,1-1"`. With `r = None` the vertex count is the largest label.
    pub fn parse(text: &str, r: Option<usize>) -> Result<Self> {
        let edges = text
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                let (u, v) = t.split_once('-').ok_or_else(|| Error::Parse(format!("edge {t:?} is not u-v")))?;
                let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
                Ok((parse(u)?, parse(v)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let r = r.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v)).max().unwrap_or(1));
        Self::new(r, edges)
    }

    pub fn vertices(&self) -> usize {
        self.r
    }
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn convention(&self) -> LoopConvention {
        self.convention
    }
    pub fn has_loops(&self) -> bool {
        self.edges.iter().any(|(u, v)| u == v)
    }

    /// Degree contributions of edge `i`: `(vertex, amount)` pairs, 0-based vertices.
    fn incidences(&self, i: usize) -> smallvec::SmallVec<[(usize, i64); 2]> {
        let (u, v) = self.edges[i];
        if u != v {
            smallvec::smallvec![(u - 1, 1), (v - 1, 1)]
        } else {
            let w = match self.convention {
                LoopConvention::Topologist => 2,
                LoopConvention::Algebraist => 1,
            };
            smallvec::smallvec![(u - 1, w)]
        }
    }

    /// Incidence matrix, one column per edge.
    pub fn incidence_matrix(&self) -> Vec<Vec<i64>> {
        (0..self.num_edges())
            .map(|i| {
                let mut col = vec![0; self.r];
                for (x, w) in self.incidences(i) {
                    col[x] += w;
                }
                col
            })
            .collect()
    }
}

impl fmt::Display for MultiGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.edges.iter().map(|(u, v)| format!("{u}-{v}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Moduli `q_1 | .. | q_r` per vertex, a target type `g`, and optionally
/// per-edge weight sets and per-vertex residue targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisibilitySpec {
    q: Vec<u64>,
    g: Vec<u64>,
    weights: Option<Vec<Vec<i64>>>,
    targets: Option<Vec<Vec<i64>>>,
}

impl DivisibilitySpec {
    pub fn new(q: Vec<u64>) -> Result<Self> {
        AbelianGroup::new(q.clone())?;
        let r = q.len();
        Ok(DivisibilitySpec { q, g: vec![0; r], weights: None, targets: None })
    }

    /// The same modulus `q` at each of `r` vertices.
    pub fn uniform(r: usize, q: u64) -> Result<Self> {
        Self::new(vec![q; r])
    }

    /// Subgraphs of type `(q, g)`: `deg j = g_j mod q_j`.
    pub fn with_type(mut self, g: &[i64]) -> Result<Self> {
        self.g = self.group().reduce(g)?;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<Vec<i64>>) -> Self {
        self.weights = Some(weights);
        self
    }

    /// Weighted degree of vertex `j` must lie in `B_j` mod `q_j`; replaces the type.
    pub fn with_targets(mut self, targets: Vec<Vec<i64>>) -> Result<Self> {
        if targets.len() != self.q.len() {
            return Err(Error::DimensionMismatch { expected: self.q.len(), actual: targets.len() });
        }
        if targets.iter().any(Vec::is_empty) {
            return Err(invalid("empty vertex target"));
        }
        self.targets = Some(targets);
        Ok(self)
    }

    pub fn q(&self) -> &[u64] {
        &self.q
    }
    pub fn g(&self) -> &[u64] {
        &self.g
    }

    /// `G(q) = sum Z/q_j`.
    pub fn group(&self) -> AbelianGroup {
        AbelianGroup::new(self.q.clone()).expect("validated on construction")
    }

    fn weight_sets(&self, n: usize) -> Result<Vec<Vec<i64>>> {
        match &self.weights {
            None => Ok(vec![vec![0, 1]; n]),
            Some(w) if w.len() == n => Ok(w.clone()),
            Some(w) => Err(Error::DimensionMismatch { expected: n, actual: w.len() }),
        }
    }

    fn target(&self) -> Target {
        match &self.targets {
            Some(b) => Target::Product(b.clone()),
            None => Target::Elements(vec![self.g.clone()]),
        }
    }

    fn accepts(&self, j: usize, degree: i64) -> bool {
        let q = self.q[j] as i64;
        match &self.targets {
            Some(b) => b[j].iter().any(|&x| (x - degree).rem_euclid(q) == 0),
            None => degree.rem_euclid(q) as u64 == self.g[j],
        }
    }
}

/// `G(q') = Z/(q_1/2) + Z/q_2 + .. + Z/q_r` (a factor 1 dropped) together
/// with an explicit isomorphism onto the even-coordinate-sum subgroup
/// `G'(q)` of `G(q)`: the generator of `Z/(q_1/2)` goes to `2e_1`, the
/// generator of `Z/q_j` (`j >= 2`) to `e_j + e_1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityIsomorphism {
    ambient: AbelianGroup,
    source: AbelianGroup,
    /// Whether the `Z/(q_1/2)` factor survives (it vanishes for `q_1 = 2`).
    keeps_first: bool,
}

impl ParityIsomorphism {
    /// Requires `q_1` even.
    pub fn new(ambient: &AbelianGroup) -> Result<Self> {
        let q = ambient.invariants();
        if q.is_empty() || !q[0].is_multiple_of(2) {
            return Err(Error::Hypothesis("the parity subgroup needs q_1 even".into()));
        }
        let keeps_first = q[0] > 2;
        let mut inv = Vec::with_capacity(q.len());
        if keeps_first {
            inv.push(q[0] / 2);
        }
        inv.extend(&q[1..]);
        let source = if inv.is_empty() { AbelianGroup::trivial() } else { AbelianGroup::new(inv)? };
        Ok(ParityIsomorphism { ambient: ambient.clone(), source, keeps_first })
    }

    /// `G(q')`.
    pub fn source(&self) -> &AbelianGroup {
        &self.source
    }
    pub fn ambient(&self) -> &AbelianGroup {
        &self.ambient
    }

    /// Coordinate-sum parity is even.
    pub fn in_subgroup(&self, y: &[u64]) -> bool {
        y.iter().sum::<u64>() % 2 == 0
    }

    /// `G(q') -> G'(q)`.
    pub fn forward(&self, x: &[u64]) -> GroupElement {
        let (first, rest) = if self.keeps_first { (x[0], &x[1..]) } else { (0, x) };
        let mut y = vec![0i64; self.ambient.rank()];
        y[0] = 2 * first as i64 + rest.iter().map(|&c| c as i64).sum::<i64>();
        for (k, &c) in rest.iter().enumerate() {
            y[k + 1] = c as i64;
        }
        self.ambient.reduce(&y).expect("rank matches")
    }

    /// `G'(q) -> G(q')`.
    pub fn backward(&self, y: &[u64]) -> Result<GroupElement> {
        if !self.in_subgroup(y) {
            return Err(invalid(format!("{y:?} has odd coordinate sum")));
        }
        let q1 = self.ambient.invariants()[0] as i64;
        let rest: i64 = y[1..].iter().map(|&c| c as i64).sum();
        let twice = (y[0] as i64 - rest).rem_euclid(q1);
        let mut x = Vec::with_capacity(self.source.rank());
        if self.keeps_first {
            x.push(twice / 2);
        }
        x.extend(y[1..].iter().map(|&c| c as i64));
        self.source.reduce(&x)
    }

    /// Checks that `forward` is an injective homomorphism onto the parity
    /// subgroup and that `backward` inverts it, by enumeration.
    pub fn verify(&self) -> bool {
        let src = self.source.elements();
        let images: Vec<GroupElement> = src.iter().map(|x| self.forward(x)).collect();
        let mut seen = vec![false; self.ambient.order() as usize];
        for (x, y) in src.iter().zip(&images) {
            if !self.in_subgroup(y) || std::mem::replace(&mut seen[self.ambient.index_of(y)], true) {
                return false;
            }
            if self.backward(y).ok().as_ref() != Some(x) {
                return false;
            }
        }
        if 2 * src.len() as u64 != self.ambient.order() {
            return false;
        }
        src.iter().enumerate().all(|(i, x)| {
            src.iter().all(|z| {
                let lhs = self.forward(&self.source.add(x, z));
                lhs == self.ambient.add(&images[i], &images[self.source.index_of(z)])
            })
        })
    }
}

/// Incidence columns of a graph as a sequence in `G(q)`, with the parity
/// isomorphism when it applies (`q_1` even, topologist loops).
#[derive(Clone, Debug)]
pub struct IncidenceSequence {
    pub sequence: GSequence,
    /// Every column has even coordinate sum.
    pub in_parity_subgroup: bool,
    pub parity: Option<ParityIsomorphism>,
}

impl IncidenceSequence {
    /// The group `G'(q)` the columns live in: `G(q')` when the parity
    /// reduction applies, `G(q)` otherwise.
    pub fn effective_group(&self) -> &AbelianGroup {
        match &self.parity {
            Some(iso) => iso.source(),
            None => self.sequence.group(),
        }
    }
}

pub fn incidence_sequence(gr: &MultiGraph, spec: &DivisibilitySpec) -> Result<IncidenceSequence> {
    if spec.q.len() != gr.r {
        return Err(Error::DimensionMismatch { expected: gr.r, actual: spec.q.len() });
    }
    let group = spec.group();
    let sequence = GSequence::new(&group, &gr.incidence_matrix())?;
    let in_parity_subgroup = sequence.terms().iter().all(|t| t.iter().sum::<u64>() % 2 == 0);
    let parity = if spec.q[0].is_multiple_of(2) && gr.convention == LoopConvention::Topologist {
        if !in_parity_subgroup {
            return Err(Error::Internal(format!("an incidence column of {gr} has odd coordinate sum")));
        }
        Some(ParityIsomorphism::new(&group)?)
    } else {
        None
    };
    Ok(IncidenceSequence { sequence, in_parity_subgroup, parity })
}

/// Result of [`count_divisible_subgraphs`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibleCount {
    /// By walking edge subsets (or weight vectors) and checking degrees.
    pub direct: BigUint,
    /// Weighted subsequence sums of the incidence sequence in `G(q)`.
    pub via_sequence: BigUint,
    /// The same count after moving the sequence into `G(q')`.
    pub via_parity: Option<BigUint>,
}

impl DivisibleCount {
    /// Excluding the empty subgraph (meaningful for unweighted, `g = 0` specs).
    pub fn nonempty(&self) -> BigUint {
        if self.direct > BigUint::ZERO {
            &self.direct - 1u32
        } else {
            BigUint::ZERO
        }
    }
}

/// Subgraphs (or `A`-weighted subgraphs) meeting the degree conditions,
/// counted three ways; any disagreement is an internal error.
pub fn count_divisible_subgraphs(gr: &MultiGraph, spec: &DivisibilitySpec, budget: Budget) -> Result<DivisibleCount> {
    let inc = incidence_sequence(gr, spec)?;
    let n = gr.num_edges();
    let weights = spec.weight_sets(n)?;
    let incidences: Vec<_> = (0..n).map(|i| gr.incidences(i)).collect();
    let radices: Vec<usize> = weights.iter().map(Vec::len).collect();
    let r = gr.r;
    let direct = grid::count_points(&radices, budget, |d| {
        let mut deg: smallvec::SmallVec<[i64; 16]> = smallvec::smallvec![0; r];
        for ((&k, a), inc) in d.iter().zip(&weights).zip(&incidences) {
            let w = a[k];
            if w != 0 {
                for &(x, c) in inc {
                    deg[x] += w * c;
                }
            }
        }
        deg.iter().enumerate().all(|(j, &x)| spec.accepts(j, x))
    })?;
    let direct = BigUint::from(direct);
    let scheme = WeightScheme::new(weights.clone(), spec.target());
    let via_sequence = count_weighted_sums(&inc.sequence, &scheme, false, budget)?;
    let via_parity = match &inc.parity {
        None => None,
        Some(iso) => {
            let group = spec.group();
            let mask = crate::zerosum::target_mask(&group, &spec.target())?;
            let targets: Vec<GroupElement> = group
                .elements()
                .into_iter()
                .zip(&mask)
                .filter(|(y, &m)| m && iso.in_subgroup(y))
                .map(|(y, _)| iso.backward(&y))
                .collect::<Result<_>>()?;
            if targets.is_empty() {
                Some(BigUint::ZERO)
            } else {
                let terms: Vec<Vec<i64>> = inc
                    .sequence
                    .terms()
                    .iter()
                    .map(|t| iso.backward(t).map(|x| x.iter().map(|&c| c as i64).collect()))
                    .collect::<Result<_>>()?;
                let moved = GSequence::new(iso.source(), &terms)?;
                let scheme = WeightScheme::new(weights, Target::Elements(targets));
                Some(BigUint::from(count_weighted_sums_dp(&moved, &scheme, false)?))
            }
        }
    };
    let agree = direct == via_sequence && via_parity.as_ref().is_none_or(|c| *c == direct);
    if !agree {
        return Err(Error::Internal(format!(
            "divisible-subgraph counts disagree for {gr}: direct {direct}, sequence {via_sequence}, parity {via_parity:?}"
        )));
    }
    Ok(DivisibleCount { direct, via_sequence, via_parity })
}

/// The closed form `(q-1)r + 1` for odd `q`, `(q-1)r - q/2 + 1` for even `q`.
pub fn script_e(r: u64, q: u64) -> Result<u64> {
    if r < 3 {
        return Err(invalid(format!("the closed form needs r >= 3 (E(2, q) = q), got r = {r}")));
    }
    if q == 0 {
        return Err(invalid("q must be positive"));
    }
    Ok(if q % 2 == 1 { (q - 1) * r + 1 } else { (q - 1) * r - q / 2 + 1 })
}

/// `G(r, q)`: `r` copies of `Z/q` for odd `q`; for even `q`, `r - 1` copies
/// and one `Z/(q/2)`.
pub fn g_rq(r: u64, q: u64) -> Result<AbelianGroup> {
    if r == 0 || q == 0 {
        return Err(invalid("r and q must be positive"));
    }
    if q == 1 {
        return Ok(AbelianGroup::trivial());
    }
    let mut inv = Vec::new();
    if q.is_multiple_of(2) {
        if q > 2 {
            inv.push(q / 2);
        }
        inv.extend(std::iter::repeat_n(q, r as usize - 1));
    } else {
        inv.extend(std::iter::repeat_n(q, r as usize));
    }
    if inv.is_empty() {
        return Ok(AbelianGroup::trivial());
    }
    AbelianGroup::new(inv)
}

/// Lower bound `2^{n+1-D}` on the number of `q`-divisible subgraphs
/// (the empty one included) of a graph with `n` edges, checked exactly.
pub fn divisible_count_bound_holds(count: &BigUint, n: usize, davenport: u64) -> bool {
    crate::zerosum::at_least_scaled_pow2(count, 1, n as i64 + 1 - davenport as i64)
}

/// The loop-free `q`-atomic multigraph on `r` vertices with `n` edges whose
/// sorted edge list is lexicographically least, or `None` when exhaustive
/// search shows every such graph has a nonempty `q`-divisible subgraph.
///
/// Sub-multigraphs of atomic graphs are atomic, so prefixes that already
/// contain a divisible subgraph are cut. The least witness in lex order is
/// also least in its orbit under vertex relabelling.
pub fn search_atomic_graph(r: usize, q: u64, n: usize, budget: Budget) -> Result<Option<MultiGraph>> {
    if r < 2 {
        return Err(invalid("need at least two vertices"));
    }
    if q == 0 {
        return Err(invalid("q must be positive"));
    }
    if n == 0 {
        return Ok(Some(MultiGraph::new(r, vec![])?));
    }
    if q == 1 {
        return Ok(None);
    }
    let group = AbelianGroup::new(vec![q; r])?;
    let order = group.order() as usize;
    let pairs: Vec<(usize, usize)> = (1..=r).flat_map(|u| (u + 1..=r).map(move |v| (u, v))).collect();
    let cols: Vec<usize> = pairs
        .iter()
        .map(|&(u, v)| {
            let mut c = vec![0i64; r];
            c[u - 1] = 1;
            c[v - 1] = 1;
            group.index_of(&group.reduce(&c).unwrap())
        })
        .collect();
    let els = group.elements();
    let add: Vec<Vec<usize>> =
        cols.iter().map(|&c| (0..order).map(|x| group.index_of(&group.add(&els[x], &els[c]))).collect()).collect();

    struct Search<'a> {
        add: &'a [Vec<usize>],
        n: usize,
        nodes: u64,
        budget: u64,
        chosen: Vec<usize>,
    }
    impl Search<'_> {
        // `sums[x]`: x is the sum of some nonempty sub-multiset chosen so far.
        fn go(&mut self, sums: &[bool], from: usize) -> Result<bool> {
            if self.chosen.len() == self.n {
                return Ok(true);
            }
            for e in from..self.add.len() {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::BudgetExceeded { required: self.nodes as u128, budget: self.budget });
                }
                let row = &self.add[e];
                let mut next = sums.to_vec();
                next[row[0]] = true;
                for (x, &on) in sums.iter().enumerate() {
                    if on {
                        next[row[x]] = true;
                    }
                }
                if next[0] {
                    continue;
                }
                self.chosen.push(e);
                if self.go(&next, e)? {
                    return Ok(true);
                }
                self.chosen.pop();
            }
            Ok(false)
        }
    }
    let mut s = Search { add: &add, n, nodes: 0, budget: budget.0, chosen: Vec::new() };
    let found = s.go(&vec![false; order], 0)?;
    crate::charge(s.nodes as u128);
    if found {
        let edges = s.chosen.iter().map(|&e| pairs[e]).collect();
        Ok(Some(MultiGraph::new(r, edges)?))
    } else {
        Ok(None)
    }
}

/// `E(r, q)`: one more than the largest edge count of a loop-free `q`-atomic
/// multigraph on `r` vertices, found by [`search_atomic_graph`].
pub fn atomic_edge_number(r: usize, q: u64, budget: Budget) -> Result<u64> {
    let mut n = 1;
    while search_atomic_graph(r, q, n, budget)?.is_some() {
        n += 1;
    }
    Ok(n as u64)
}

/// `m(#A_1..#A_n; sum #A_i - sum_j (q_j - #B_j))` for weighted `B`-divisible
/// subgraphs when every `q_j` is a power of one prime.
pub fn weighted_subgraph_report(
    gr: &MultiGraph,
    spec: &DivisibilitySpec,
    count: &BigUint,
) -> Result<VerificationReport> {
    let group = spec.group();
    let p = group.prime().ok_or_else(|| Error::Hypothesis(format!("{group} is not a p-group")))?;
    let weights = spec.weight_sets(gr.num_edges())?;
    let targets = spec.targets.clone().unwrap_or_else(|| spec.g.iter().map(|&x| vec![x as i64]).collect());
    for s in weights.iter().chain(&targets) {
        for (i, x) in s.iter().enumerate() {
            if s[..i].iter().any(|y| (x - y).rem_euclid(p as i64) == 0) {
                return Err(Error::Hypothesis(format!("{s:?} has two elements congruent mod {p}")));
            }
        }
    }
    let sizes: Vec<u64> = weights.iter().map(|a| a.len() as u64).collect();
    let arg = sizes.iter().map(|&a| a as i128).sum::<i128>()
        - spec.q.iter().zip(&targets).map(|(&q, b)| q as i128 - b.len() as i128).sum::<i128>();
    VerificationReport::new(count.clone(), &sizes, arg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Budget {
        Budget::default()
    }

    #[test]
    fn hypergraph_examples() {
        let h = Hypergraph::parse("0;1;2").unwrap();
        let c = hypergraph_count(&h, 2, &[0], b()).unwrap();
        assert_eq!(c.count, 4u32.into());
        assert_eq!(c.polynomial_count, Some(4u32.into()));
        let rep = c.report.as_ref().unwrap();
        assert_eq!(rep.bound, 4u32.into());
        assert!(c.holds());

        let h = Hypergraph::parse("0").unwrap();
        assert_eq!(hypergraph_count(&h, 2, &[0], b()).unwrap().count, 1u32.into());

        let h = Hypergraph::parse("0,1;1,2").unwrap();
        assert_eq!(h.max_degree(), 2);
        // unions: {}, {0,1}, {1,2}, {0,1,2}
        assert_eq!(hypergraph_count(&h, 3, &[0], b()).unwrap().count, 2u32.into());
        assert_eq!(hypergraph_count(&h, 6, &[2], b()).unwrap().count, 2u32.into());
        assert_eq!(hypergraph_count(&h, 6, &[2], b()).unwrap().report, None);
    }

    #[test]
    fn union_polynomial_matches_union_sizes() {
        let h = Hypergraph::parse("0,1,2;2,3;0,3,4;5").unwrap();
        let ring = make_chain_ring(7, 1, 1).unwrap();
        let poly = h.union_polynomial(&ring).unwrap();
        assert!(poly.total_degree().unwrap() as usize <= h.max_degree());
        for mask in 0..16u32 {
            let pick: Vec<bool> = (0..4).map(|i| mask >> i & 1 == 1).collect();
            let x: Vec<_> = pick.iter().map(|&on| ring.from_int(on as i128)).collect();
            assert_eq!(poly.eval(&x).unwrap(), ring.from_int(h.union_size(&pick) as i128));
        }
    }

    #[test]
    fn schmitt_examples() {
        for (args, len, targets) in
            [((1, 1, 2, 1), 1, vec![0]), ((1, 2, 2, 1), 2, vec![0]), ((2, 1, 3, 1), 1, vec![0, 2])]
        {
            let (h, bset) = schmitt_construction(args.0, args.1, args.2, args.3).unwrap();
            assert_eq!(h.len(), len);
            let mut sorted = bset.clone();
            sorted.sort();
            assert_eq!(sorted, targets);
            let c = hypergraph_count(&h, args.2, &bset, b()).unwrap();
            assert_eq!(c.nonempty, 0u32.into(), "{args:?}");
        }
        assert_eq!(schmitt_construction(1, 1, 2, 1).unwrap().0.sets()[0].len(), 3);
        assert!(schmitt_construction(2, 1, 4, 2).is_err());
        assert!(schmitt_construction(3, 1, 3, 1).is_err());
    }

    #[test]
    fn incidence_examples() {
        let spec = DivisibilitySpec::uniform(3, 2).unwrap();
        let c3 = MultiGraph::parse("1-2,2-3,1-3", None).unwrap();
        let inc = incidence_sequence(&c3, &spec).unwrap();
        assert_eq!(inc.sequence.terms(), &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        assert!(inc.in_parity_subgroup);
        assert_eq!(inc.effective_group().invariants(), &[2, 2]);

        let spec1 = DivisibilitySpec::uniform(1, 2).unwrap();
        let top = MultiGraph::parse("1-1", None).unwrap();
        assert_eq!(incidence_sequence(&top, &spec1).unwrap().sequence.terms(), &[vec![0]]);
        let alg = top.clone().with_convention(LoopConvention::Algebraist);
        let inc = incidence_sequence(&alg, &spec1).unwrap();
        assert_eq!(inc.sequence.terms(), &[vec![1]]);
        assert!(inc.parity.is_none());
    }

    #[test]
    fn divisible_examples() {
        let spec = DivisibilitySpec::uniform(3, 2).unwrap();
        let p3 = MultiGraph::parse("1-2,2-3", None).unwrap();
        let c = count_divisible_subgraphs(&p3, &spec, b()).unwrap();
        assert_eq!(c.direct, 1u32.into());
        assert_eq!(c.nonempty(), 0u32.into());
        let c3 = MultiGraph::parse("1-2,2-3,1-3", None).unwrap();
        let c = count_divisible_subgraphs(&c3, &spec, b()).unwrap();
        assert_eq!(c.direct, 2u32.into());
        assert_eq!(c.via_parity, Some(2u32.into()));
        assert!(DivisibilitySpec::uniform(3, 1).is_err());

        // type (2, (1,1,0)): the single edge 1-2 out of the triangle
        let typed = spec.clone().with_type(&[1, 1, 0]).unwrap();
        assert_eq!(count_divisible_subgraphs(&c3, &typed, b()).unwrap().direct, 2u32.into());
        // odd coordinate sum is never reached
        let odd = spec.with_type(&[1, 0, 0]).unwrap();
        let c = count_divisible_subgraphs(&c3, &odd, b()).unwrap();
        assert_eq!((c.direct, c.via_parity), (0u32.into(), Some(0u32.into())));
    }

    #[test]
    fn weighted_divisible_examples() {
        let spec = DivisibilitySpec::uniform(2, 3)
            .unwrap()
            .with_weights(vec![vec![0, 1, 2]; 2])
            .with_targets(vec![vec![0], vec![0, 1]])
            .unwrap();
        // two parallel edges 1-2 with weights a, b: a + b in {0} mod 3 at both ends
        let g = MultiGraph::parse("1-2,1-2", None).unwrap();
        let c = count_divisible_subgraphs(&g, &spec, b()).unwrap();
        assert_eq!(c.direct, 3u32.into());
        let rep = weighted_subgraph_report(&g, &spec, &c.direct).unwrap();
        assert_eq!(rep.bound_argument, 6 - 2 - 1);
        assert!(rep.holds);
    }

    #[test]
    fn parity_isomorphisms() {
        for q in [vec![2], vec![2, 2], vec![2, 4], vec![4, 4], vec![2, 2, 2], vec![6, 6], vec![4, 8]] {
            let g = AbelianGroup::new(q.clone()).unwrap();
            let iso = ParityIsomorphism::new(&g).unwrap();
            assert!(iso.verify(), "{q:?}");
            assert_eq!(2 * iso.source().order(), g.order());
        }
        assert!(ParityIsomorphism::new(&AbelianGroup::new(vec![3]).unwrap()).is_err());
    }

    #[test]
    fn script_e_examples() {
        assert_eq!(script_e(3, 2).unwrap(), 3);
        assert_eq!(script_e(3, 3).unwrap(), 7);
        assert_eq!(script_e(4, 2).unwrap(), 4);
        assert!(script_e(2, 2).is_err());
        for r in 3..=5 {
            for q in 1..=6 {
                assert_eq!(crate::zerosum::little_d(&g_rq(r, q).unwrap()), script_e(r, q).unwrap(), "r={r} q={q}");
            }
        }
    }

    #[test]
    fn atomic_search_examples() {
        let p3 = search_atomic_graph(3, 2, 2, b()).unwrap().unwrap();
        assert_eq!(p3.to_string(), "1-2,1-3");
        assert_eq!(search_atomic_graph(3, 2, 3, b()).unwrap(), None);
        assert_eq!(atomic_edge_number(3, 2, b()).unwrap(), 3);
        // q - 1 parallel edges between two vertices
        let g = search_atomic_graph(2, 5, 4, b()).unwrap().unwrap();
        assert_eq!(g.to_string(), "1-2,1-2,1-2,1-2");
        assert_eq!(atomic_edge_number(2, 5, b()).unwrap(), 5);
    }
}

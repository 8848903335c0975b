//! Restricted-input / restricted-output polynomial systems over a chain ring:
//! exact solution counts, the fat-target product `Q`, the valuation lemma
//! behind it, and the lower bounds these counts must satisfy.
//!
//! A system has input sets `A_1..A_n`, polynomials `f_1..f_r`, exponents
//! `1 <= v_j <= v` and output sets `B_1..B_r`. Its solutions are the points
//! `x` of `A_1 x ... x A_n` with `f_j(x) ≡ b (mod p^{v_j})` for some `b` in
//! `B_j`, for every `j`. The count is 0 or at least
//! `m(#A_1..#A_n; sum #A_i - sum_j (q^{v_j} - #B_j) deg f_j)`.

use std::fmt;

use num_bigint::BigUint;

use crate::chainring::{check_condition, ChainRing, Condition, RingElement, RingSubset};
use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::mbound::m_bound_clamped;
use crate::mpoly::MPoly;
use crate::Budget;

#[derive(Clone, Debug)]
pub struct RestrictedSystem {
    ring: ChainRing,
    inputs: Vec<RingSubset>,
    polys: Vec<MPoly>,
    exponents: Vec<u32>,
    outputs: Vec<RingSubset>,
}

impl RestrictedSystem {
    pub fn new(
        ring: &ChainRing,
        inputs: Vec<RingSubset>,
        polys: Vec<MPoly>,
        exponents: Vec<u32>,
        outputs: Vec<RingSubset>,
    ) -> Result<Self> {
        if inputs.is_empty() {
            return Err(invalid("a system needs at least one variable"));
        }
        if polys.len() != exponents.len() || polys.len() != outputs.len() {
            return Err(invalid(format!(
                "{} polynomials, {} exponents and {} output sets do not line up",
                polys.len(),
                exponents.len(),
                outputs.len()
            )));
        }
        let n = inputs.len();
        for (label, set) in inputs.iter().map(|s| ("input", s)).chain(outputs.iter().map(|s| ("output", s))) {
            if set.is_empty() {
                return Err(Error::Hypothesis(format!("empty {label} set")));
            }
            if set.ring_id() != ring.id() {
                return Err(Error::MixedRings { left: ring.id(), right: set.ring_id() });
            }
            if !check_condition(ring, set, Condition::F)? {
                return Err(Error::Hypothesis(format!("{label} set {set} has two elements congruent mod p")));
            }
        }
        for f in &polys {
            if f.ring() != ring {
                return Err(Error::MixedRings { left: ring.id(), right: f.ring().id() });
            }
            if f.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: f.nvars() });
            }
        }
        for &vj in &exponents {
            if vj < 1 || vj > ring.length() {
                return Err(invalid(format!("exponent {vj} outside [1, {}]", ring.length())));
            }
        }
        Ok(RestrictedSystem { ring: ring.clone(), inputs, polys, exponents, outputs })
    }

    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }
    pub fn nvars(&self) -> usize {
        self.inputs.len()
    }
    pub fn inputs(&self) -> &[RingSubset] {
        &self.inputs
    }
    pub fn polys(&self) -> &[MPoly] {
        &self.polys
    }
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }
    pub fn outputs(&self) -> &[RingSubset] {
        &self.outputs
    }

    pub fn input_sizes(&self) -> Vec<u64> {
        self.inputs.iter().map(|a| a.len() as u64).collect()
    }

    /// `sum_j (q^{v_j} - #B_j) deg f_j`, with the zero polynomial contributing 0.
    pub fn degree_cost(&self) -> u128 {
        let q = self.ring.residue_size() as u128;
        self.polys
            .iter()
            .zip(&self.exponents)
            .zip(&self.outputs)
            .map(|((f, &vj), b)| (q.pow(vj) - b.len() as u128) * f.total_degree().unwrap_or(0) as u128)
            .sum()
    }

    /// Second argument of the bound: `sum #A_i - degree_cost`.
    pub fn bound_argument(&self) -> i128 {
        self.input_sizes().iter().map(|&a| a as i128).sum::<i128>() - self.degree_cost() as i128
    }

    /// Whether `x` (one coordinate per variable) is a solution.
    pub fn is_solution(&self, x: &[RingElement]) -> Result<bool> {
        for (j, f) in self.polys.iter().enumerate() {
            let value = f.eval(x)?;
            if !self.hits_target(j, &value) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn hits_target(&self, j: usize, value: &RingElement) -> bool {
        let vj = self.exponents[j];
        self.outputs[j].iter().any(|b| self.ring.valuation(&self.ring.sub_unchecked(value, b)) >= vj)
    }

    fn radices(&self) -> Vec<usize> {
        self.inputs.iter().map(|a| a.len()).collect()
    }

    fn point(&self, digits: &[usize]) -> Vec<RingElement> {
        digits.iter().zip(&self.inputs).map(|(&d, a)| a.elements()[d].clone()).collect()
    }
}

impl fmt::Display for RestrictedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "over {}: A = [", self.ring)?;
        for (i, a) in self.inputs.iter().enumerate() {
            write!(f, "{}{a}", if i > 0 { ", " } else { "" })?;
        }
        write!(f, "]")?;
        for ((p, vj), b) in self.polys.iter().zip(&self.exponents).zip(&self.outputs) {
            write!(f, "; {p} in {b} mod p^{vj}")?;
        }
        Ok(())
    }
}

/// A solution or non-vanishing count together with the lower bound it is
/// checked against. `holds` is `count == 0 || count >= bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub count: BigUint,
    pub bound: BigUint,
    /// The second argument handed to the bound function.
    pub bound_argument: i128,
    /// The argument fell below 1, so the bound is the trivial 1.
    pub vacuous: bool,
    pub holds: bool,
}

impl VerificationReport {
    pub fn new(count: BigUint, sizes: &[u64], bound_argument: i128) -> Result<Self> {
        let (bound, vacuous) = m_bound_clamped(sizes, bound_argument)?;
        let holds = count == BigUint::ZERO || count >= bound;
        Ok(VerificationReport { count, bound, bound_argument, vacuous, holds })
    }
}

/// `c(v) = sum_{i=1}^{v-1} (q^i - 1)`.
pub fn c_budget(q: u64, vj: u32) -> u64 {
    (1..vj).map(|i| q.pow(i) - 1).sum()
}

/// Result of the valuation lemma for one `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AfkOutcome {
    /// Valuation of `prod_{y in S(v_j) \ T} (x - y)`, computed in a ring of length `length`.
    pub valuation: u32,
    /// Some `y` in `T` has `ord(x - y) >= v_j`.
    pub equality_case: bool,
    pub c: u64,
    pub length: u32,
}

impl AfkOutcome {
    /// `valuation >= c`, with equality exactly in the equality case.
    pub fn lemma_holds(&self) -> bool {
        let v = self.valuation as u64;
        v >= self.c && ((v == self.c) == self.equality_case)
    }
}

/// Ring length used for the lemma's product: long enough that a strict
/// inequality `> c(v_j)` is never hidden by `p^length = 0`.
pub fn afk_length(ring: &ChainRing, vj: u32) -> u32 {
    let c = c_budget(ring.residue_size(), vj);
    ring.length().max((c + vj as u64 + 1) as u32)
}

/// Valuation of `prod_{y in S(v_j) \ T-bar} (x - y)` and the equality flag.
pub fn afk_valuation(ring: &ChainRing, x: &RingElement, vj: u32, t: &RingSubset) -> Result<AfkOutcome> {
    if vj < 1 || vj > ring.length() {
        return Err(invalid(format!("v_j = {vj} outside [1, {}]", ring.length())));
    }
    if !ring.contains(x) {
        return Err(Error::MixedRings { left: ring.id(), right: x.ring_id() });
    }
    if !check_condition(ring, t, Condition::F)? {
        return Err(Error::Hypothesis(format!("{t} has two elements congruent mod p")));
    }
    let c = c_budget(ring.residue_size(), vj);
    let length = afk_length(ring, vj);
    let big = ring.with_length(length)?;
    let x = big.transfer(x)?;
    let t_bar: Vec<RingElement> =
        t.iter().map(|y| big.transfer(&ring.reduce_mod_power(y, vj))).collect::<Result<_>>()?;
    let mut prod = big.one();
    for y in big.coset_representatives(vj)? {
        if !t_bar.contains(&y) {
            prod = big.mul_unchecked(&prod, &big.sub_unchecked(&x, &y));
        }
    }
    let equality_case = t_bar.iter().any(|y| big.valuation(&big.sub_unchecked(&x, y)) >= vj);
    Ok(AfkOutcome { valuation: big.valuation(&prod), equality_case, c, length })
}

/// Precomputed `ord(x - y)` for every element `x` of a ring and every `y`
/// in `S(v_j)`, so that the lemma can be evaluated for many sets `T` at the
/// cost of a few subtractions. In a chain ring the valuation of a product is
/// `min(length, sum of factor valuations)`, which is what
/// [`AfkTable::outcome`] returns.
pub struct AfkTable {
    vj: u32,
    c: u64,
    length: u32,
    reps: Vec<RingElement>,
    ords: Vec<u32>,
    totals: Vec<u64>,
}

impl AfkTable {
    pub fn new(ring: &ChainRing, vj: u32) -> Result<Self> {
        if vj < 1 || vj > ring.length() {
            return Err(invalid(format!("v_j = {vj} outside [1, {}]", ring.length())));
        }
        let c = c_budget(ring.residue_size(), vj);
        let length = afk_length(ring, vj);
        let big = ring.with_length(length)?;
        let reps = ring.coset_representatives(vj)?;
        let big_reps: Vec<RingElement> = reps.iter().map(|y| big.transfer(y)).collect::<Result<_>>()?;
        let xs = ring.elements()?;
        let mut ords = Vec::with_capacity(xs.len() * reps.len());
        let mut totals = Vec::with_capacity(xs.len());
        for x in &xs {
            let x = big.transfer(x)?;
            let mut total = 0u64;
            for y in &big_reps {
                let o = big.valuation(&big.sub_unchecked(&x, y));
                total += o as u64;
                ords.push(o);
            }
            totals.push(total);
        }
        Ok(AfkTable { vj, c, length, reps, ords, totals })
    }

    /// `S(v_j)` in index order; sets `T` are given as indices into this list.
    pub fn reps(&self) -> &[RingElement] {
        &self.reps
    }

    pub fn num_points(&self) -> usize {
        self.totals.len()
    }

    /// Outcome for the `x_index`-th ring element and `T = {reps[i] : i in t}`.
    /// `t` must have distinct entries.
    pub fn outcome(&self, x_index: usize, t: &[usize]) -> AfkOutcome {
        let row = &self.ords[x_index * self.reps.len()..(x_index + 1) * self.reps.len()];
        let mut sum = self.totals[x_index];
        let mut equality_case = false;
        for &i in t {
            sum -= row[i] as u64;
            equality_case |= row[i] >= self.vj;
        }
        AfkOutcome { valuation: sum.min(self.length as u64) as u32, equality_case, c: self.c, length: self.length }
    }

    /// `ord(x - reps[y_index])` as stored.
    pub fn factor_valuation(&self, x_index: usize, y_index: usize) -> u32 {
        self.ords[x_index * self.reps.len() + y_index]
    }
}

/// `Q = prod_j prod_{y in S(v_j) \ B_j-bar} (f_j - y)`, kept in factored form
/// over `R/p^{c+1}` with `c = sum_j c(v_j)`. A grid point is a solution
/// exactly when `Q` does not vanish there.
#[derive(Clone, Debug)]
pub struct FatTargetPolynomial {
    ring: ChainRing,
    polys: Vec<MPoly>,
    factors: Vec<(usize, RingElement)>,
    c: u64,
    formal_degree: u128,
}

pub fn build_fat_target_polynomial(sys: &RestrictedSystem) -> Result<FatTargetPolynomial> {
    let ring = sys.ring();
    let q = ring.residue_size();
    let c: u64 = sys.exponents.iter().map(|&vj| c_budget(q, vj)).sum();
    let length = u32::try_from(c + 1).map_err(|_| invalid("c + 1 does not fit a ring length"))?;
    let rbar = ring.with_length(length)?;
    let polys = sys.polys.iter().map(|f| f.transfer(&rbar)).collect::<Result<Vec<_>>>()?;
    let mut factors = Vec::new();
    for (j, (&vj, b)) in sys.exponents.iter().zip(&sys.outputs).enumerate() {
        let b_bar: Vec<RingElement> = b.iter().map(|y| ring.reduce_mod_power(y, vj)).collect();
        for y in ring.coset_representatives(vj)? {
            if !b_bar.contains(&y) {
                factors.push((j, rbar.transfer(&y)?));
            }
        }
    }
    Ok(FatTargetPolynomial { ring: rbar, polys, factors, c, formal_degree: sys.degree_cost() })
}

impl FatTargetPolynomial {
    /// `R/p^{c+1}`.
    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }
    /// Pairs `(j, y)` standing for the factor `f_j - y`.
    pub fn factors(&self) -> &[(usize, RingElement)] {
        &self.factors
    }
    pub fn c(&self) -> u64 {
        self.c
    }
    /// `sum_j (q^{v_j} - #B_j) deg f_j`.
    pub fn formal_degree(&self) -> u128 {
        self.formal_degree
    }

    /// `Q(x)` in `R/p^{c+1}`; `x` has coordinates in the system's ring.
    pub fn eval(&self, x: &[RingElement]) -> Result<RingElement> {
        let x = self.lift(x)?;
        let values = self.polys.iter().map(|f| f.eval(&x)).collect::<Result<Vec<_>>>()?;
        let mut acc = self.ring.one();
        for (j, y) in &self.factors {
            acc = self.ring.mul_unchecked(&acc, &self.ring.sub_unchecked(&values[*j], y));
        }
        Ok(acc)
    }

    /// `Q(x) != 0`, multiplying factor by factor and stopping at the first zero.
    pub fn is_nonzero_at(&self, x: &[RingElement]) -> Result<bool> {
        let x = self.lift(x)?;
        Ok(self.nonzero_lifted(&x))
    }

    fn nonzero_lifted(&self, x: &[RingElement]) -> bool {
        let r = &self.ring;
        let mut acc = r.one();
        let mut current: Option<(usize, RingElement)> = None;
        for (j, y) in &self.factors {
            let value = match &current {
                Some((k, v)) if k == j => v.clone(),
                _ => {
                    let v = self.polys[*j].eval_unchecked(x);
                    current = Some((*j, v.clone()));
                    v
                }
            };
            acc = r.mul_unchecked(&acc, &r.sub_unchecked(&value, y));
            if acc.is_zero() {
                return false;
            }
        }
        true
    }

    fn lift(&self, x: &[RingElement]) -> Result<Vec<RingElement>> {
        x.iter().map(|e| self.ring.transfer(e)).collect()
    }

    /// Fully expanded `Q` over `R/p^{c+1}`. Only sensible for tiny systems.
    pub fn expand(&self, nvars: usize) -> Result<MPoly> {
        let fs = self
            .factors
            .iter()
            .map(|(j, y)| self.polys[*j].sub(&MPoly::constant(&self.ring, nvars, y.clone())?))
            .collect::<Result<Vec<_>>>()?;
        crate::mpoly::poly_product_expand(&self.ring, nvars, &fs)
    }
}

/// Exact number of solutions, by walking the whole input grid.
pub fn count_restricted_solutions(sys: &RestrictedSystem, budget: Budget) -> Result<BigUint> {
    let n = grid::count_points(&sys.radices(), budget, |d| {
        let x = sys.point(d);
        (0..sys.polys.len()).all(|j| sys.hits_target(j, &sys.polys[j].eval_unchecked(&x)))
    })?;
    Ok(BigUint::from(n))
}

/// Number of grid points where the fat-target product `Q` does not vanish
/// modulo `p^{c+1}`. Equal to the solution count.
pub fn count_fat_target_nonvanishing(sys: &RestrictedSystem, budget: Budget) -> Result<BigUint> {
    let q = build_fat_target_polynomial(sys)?;
    let lifted: Vec<Vec<RingElement>> =
        sys.inputs.iter().map(|a| a.iter().map(|e| q.ring.transfer(e)).collect()).collect::<Result<_>>()?;
    let n = grid::count_points(&sys.radices(), budget, |d| {
        let x: Vec<RingElement> = d.iter().zip(&lifted).map(|(&k, a)| a[k].clone()).collect();
        q.nonzero_lifted(&x)
    })?;
    Ok(BigUint::from(n))
}

/// Solution count checked against the lower bound.
pub fn verify_main_theorem(sys: &RestrictedSystem, budget: Budget) -> Result<VerificationReport> {
    let count = count_restricted_solutions(sys, budget)?;
    VerificationReport::new(count, &sys.input_sizes(), sys.bound_argument())
}

/// Number of grid points where `f` is nonzero, checked against
/// `m(#A_1..#A_n; sum #A_i - deg f)`. The zero polynomial has count 0.
pub fn count_nonvanishing(f: &MPoly, grid_sets: &[RingSubset], budget: Budget) -> Result<VerificationReport> {
    let ring = f.ring();
    check_grid(ring, f.nvars(), grid_sets)?;
    let sizes: Vec<u64> = grid_sets.iter().map(|a| a.len() as u64).collect();
    let Some(deg) = f.total_degree() else {
        return VerificationReport::new(BigUint::ZERO, &sizes, sizes.iter().sum::<u64>() as i128);
    };
    let radices: Vec<usize> = grid_sets.iter().map(|a| a.len()).collect();
    let n = grid::count_points(&radices, budget, |d| {
        let x: Vec<RingElement> = d.iter().zip(grid_sets).map(|(&k, a)| a.elements()[k].clone()).collect();
        !f.eval_unchecked(&x).is_zero()
    })?;
    VerificationReport::new(BigUint::from(n), &sizes, sizes.iter().sum::<u64>() as i128 - deg as i128)
}

fn check_grid(ring: &ChainRing, nvars: usize, grid_sets: &[RingSubset]) -> Result<()> {
    if grid_sets.len() != nvars {
        return Err(Error::DimensionMismatch { expected: nvars, actual: grid_sets.len() });
    }
    for a in grid_sets {
        if a.is_empty() {
            return Err(Error::Hypothesis("empty grid set".into()));
        }
        if a.ring_id() != ring.id() {
            return Err(Error::MixedRings { left: ring.id(), right: a.ring_id() });
        }
        if !check_condition(ring, a, Condition::D)? {
            return Err(Error::Hypothesis(format!("{a} has a difference that is a zero divisor")));
        }
    }
    Ok(())
}

/// `prod_i prod_{x in Y_i} (t_i - x)` where `Y_i` is the first `#A_i - y_i`
/// elements of `A_i` in ring order. It has degree `sum (#A_i - y_i)` and is
/// nonzero exactly on `prod (A_i \ Y_i)`, a set of `prod y_i` points, which
/// is the bound when `y` is a minimizer.
pub fn sharp_alon_furedi_instance(ring: &ChainRing, grid_sets: &[RingSubset], y: &[u64]) -> Result<MPoly> {
    check_grid(ring, grid_sets.len(), grid_sets)?;
    if y.len() != grid_sets.len() {
        return Err(Error::DimensionMismatch { expected: grid_sets.len(), actual: y.len() });
    }
    let n = grid_sets.len();
    let mut f = MPoly::constant(ring, n, ring.one())?;
    for (i, (a, &yi)) in grid_sets.iter().zip(y).enumerate() {
        if yi < 1 || yi as usize > a.len() {
            return Err(invalid(format!("y_{} = {yi} outside [1, {}]", i + 1, a.len())));
        }
        let mut sorted = a.elements().to_vec();
        sorted.sort();
        let ti = MPoly::var(ring, n, i)?;
        for x in &sorted[..a.len() - yi as usize] {
            f = f.mul(&ti.sub(&MPoly::constant(ring, n, x.clone())?)?)?;
        }
    }
    Ok(f)
}

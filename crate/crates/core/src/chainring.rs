//! Finite chain rings realized as Galois rings `GR(p^v, ell) = (Z/p^v)[x]/(f)`.
//!
//! `f` is monic of degree `ell` and irreducible mod `p`, so `p` generates the
//! maximal ideal, the residue field has `q = p^ell` elements, and the ideals
//! form the chain `R ⊋ (p) ⊋ … ⊋ (p^v) = 0`. Elements are coefficient vectors
//! of length `ell` with entries in `[0, p^v)`.
//!
//! The modulus is the first monic degree-`ell` polynomial over `F_p` with
//! irreducible reduction when candidates are ordered by the integer
//! `sum c_i p^i` (so the highest non-leading coefficient is compared first).
//! For `ell = 1` that is `x` itself and the ring is `Z/p^v`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{invalid, Error, Result};

pub type Coeffs = SmallVec<[u128; 2]>;

/// Largest supported bit length of `p^v`; sums of two residues stay below 2^127.
const MAX_MODULUS_BITS: u64 = 126;

/// Identity of a ring: two rings with equal parameters are the same ring,
/// because the modulus polynomial is a deterministic function of `(p, ell)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RingId {
    pub p: u64,
    pub ell: u32,
    pub v: u32,
}

impl fmt::Display for RingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GR({}^{}, {})", self.p, self.v, self.ell)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Neg,
}

/// Conditions on finite subsets: pairwise differences are units (F) or
/// non-zero-divisors (D).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Condition {
    F,
    D,
}

#[derive(Clone)]
pub struct ChainRing(Arc<RingData>);

struct RingData {
    id: RingId,
    /// Low coefficients `m_0..m_{ell-1}` of `f = x^ell + sum m_i x^i`.
    modulus: Vec<u128>,
    p_pows: Vec<u128>,
}

impl PartialEq for ChainRing {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for ChainRing {}

impl fmt::Debug for ChainRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.0.id, self.modulus_display())
    }
}

impl fmt::Display for ChainRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.id)
    }
}

/// Builds `GR(p^v, ell)`.
pub fn make_chain_ring(p: u64, ell: u32, v: u32) -> Result<ChainRing> {
    ChainRing::new(p, ell, v)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl ChainRing {
    pub fn new(p: u64, ell: u32, v: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if ell == 0 || v == 0 {
            return Err(invalid(format!("ell and v must be >= 1 (got ell={ell}, v={v})")));
        }
        if !fits(p, v) {
            return Err(invalid(format!("{p}^{v} exceeds 2^{MAX_MODULUS_BITS}")));
        }
        let mut p_pows = Vec::with_capacity(v as usize + 1);
        let mut acc = 1u128;
        p_pows.push(acc);
        for _ in 0..v {
            acc *= p as u128;
            p_pows.push(acc);
        }
        let modulus = smallest_irreducible(p, ell as usize)
            .ok_or_else(|| Error::Internal(format!("no monic irreducible of degree {ell} over F_{p}")))?
            .into_iter()
            .map(u128::from)
            .collect();
        Ok(ChainRing(Arc::new(RingData { id: RingId { p, ell, v }, modulus, p_pows })))
    }

    /// The same residue field with a different length.
    pub fn with_length(&self, v: u32) -> Result<Self> {
        Self::new(self.p(), self.ell(), v)
    }

    pub fn id(&self) -> RingId {
        self.0.id
    }
    pub fn p(&self) -> u64 {
        self.0.id.p
    }
    pub fn ell(&self) -> u32 {
        self.0.id.ell
    }
    /// Length `v` of the ideal chain; `p^v = 0`.
    pub fn length(&self) -> u32 {
        self.0.id.v
    }
    /// `q = p^ell`.
    pub fn residue_size(&self) -> u64 {
        self.p().pow(self.ell())
    }
    /// `p^a` for `0 <= a <= v`.
    pub fn p_power(&self, a: u32) -> u128 {
        self.0.p_pows[a as usize]
    }
    fn pv(&self) -> u128 {
        self.0.p_pows[self.length() as usize]
    }

    /// Monic modulus polynomial, coefficients from the constant term up.
    pub fn modulus_poly(&self) -> Vec<u128> {
        let mut out = self.0.modulus.clone();
        out.push(1);
        out
    }

    fn modulus_display(&self) -> String {
        let m = self.modulus_poly();
        let mut parts = Vec::new();
        for (i, c) in m.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            };
            parts.push(match (c, i) {
                (_, 0) => c.to_string(),
                (1, _) => mono,
                _ => format!("{c}{mono}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }

    /// Number of elements `p^(v*ell)`, if it fits in a `u64`.
    pub fn size(&self) -> Option<u64> {
        let total = self.length().checked_mul(self.ell())?;
        self.p().checked_pow(total)
    }

    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.p()).pow(self.length() * self.ell())
    }

    pub fn contains(&self, x: &RingElement) -> bool {
        x.ring == self.0.id
    }

    fn check(&self, x: &RingElement) -> Result<()> {
        if x.ring == self.0.id {
            Ok(())
        } else {
            Err(Error::MixedRings { left: self.0.id, right: x.ring })
        }
    }

    fn raw(&self, coeffs: Coeffs) -> RingElement {
        RingElement { ring: self.0.id, coeffs }
    }

    pub fn zero(&self) -> RingElement {
        self.raw(SmallVec::from_elem(0, self.ell() as usize))
    }

    pub fn one(&self) -> RingElement {
        self.from_int(1)
    }

    /// The image of an integer.
    pub fn from_int(&self, n: i128) -> RingElement {
        let mut c: Coeffs = SmallVec::from_elem(0, self.ell() as usize);
        c[0] = reduce_signed(n, self.pv());
        self.raw(c)
    }

    /// Element `sum c_i x^i`; shorter vectors are zero padded.
    pub fn from_coeffs(&self, coeffs: &[i128]) -> Result<RingElement> {
        if coeffs.len() > self.ell() as usize {
            return Err(Error::DimensionMismatch { expected: self.ell() as usize, actual: coeffs.len() });
        }
        let mut c: Coeffs = SmallVec::from_elem(0, self.ell() as usize);
        for (slot, &v) in c.iter_mut().zip(coeffs) {
            *slot = reduce_signed(v, self.pv());
        }
        Ok(self.raw(c))
    }

    /// The class of `x` modulo `p^a`, as the representative with coefficients in `[0, p^a)`.
    pub fn reduce_mod_power(&self, x: &RingElement, a: u32) -> RingElement {
        let m = self.p_power(a.min(self.length()));
        self.raw(x.coeffs.iter().map(|c| c % m).collect())
    }

    /// Maps `x` from a ring with the same `(p, ell)` into this one: the quotient
    /// map when this ring is shorter, the canonical lift when it is longer.
    pub fn transfer(&self, x: &RingElement) -> Result<RingElement> {
        if x.ring.p != self.p() || x.ring.ell != self.ell() {
            return Err(Error::MixedRings { left: self.0.id, right: x.ring });
        }
        let m = self.pv();
        Ok(self.raw(x.coeffs.iter().map(|c| c % m).collect()))
    }

    pub fn arith(&self, a: &RingElement, b: &RingElement, op: ArithOp) -> Result<RingElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match op {
            ArithOp::Add => self.add_unchecked(a, b),
            ArithOp::Sub => self.sub_unchecked(a, b),
            ArithOp::Mul => self.mul_unchecked(a, b),
            ArithOp::Neg => self.neg_unchecked(a),
        })
    }

    pub fn add(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        self.arith(a, b, ArithOp::Add)
    }
    pub fn sub(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        self.arith(a, b, ArithOp::Sub)
    }
    pub fn mul(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        self.arith(a, b, ArithOp::Mul)
    }
    pub fn neg(&self, a: &RingElement) -> Result<RingElement> {
        self.check(a)?;
        Ok(self.neg_unchecked(a))
    }

    pub fn pow(&self, a: &RingElement, mut e: u64) -> Result<RingElement> {
        self.check(a)?;
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_unchecked(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul_unchecked(&base, &base);
            }
        }
        Ok(acc)
    }

    pub(crate) fn add_unchecked(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let m = self.pv();
        self.raw(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| add_mod(*x, *y, m)).collect())
    }

    pub(crate) fn sub_unchecked(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let m = self.pv();
        self.raw(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| sub_mod(*x, *y, m)).collect())
    }

    pub(crate) fn neg_unchecked(&self, a: &RingElement) -> RingElement {
        let m = self.pv();
        self.raw(a.coeffs.iter().map(|x| sub_mod(0, *x, m)).collect())
    }

    pub(crate) fn mul_unchecked(&self, a: &RingElement, b: &RingElement) -> RingElement {
        let m = self.pv();
        let ell = self.ell() as usize;
        if ell == 1 {
            return self.raw(smallvec::smallvec![mul_mod(a.coeffs[0], b.coeffs[0], m)]);
        }
        let mut prod: SmallVec<[u128; 4]> = SmallVec::from_elem(0, 2 * ell - 1);
        for (i, x) in a.coeffs.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                prod[i + j] = add_mod(prod[i + j], mul_mod(*x, *y, m), m);
            }
        }
        // x^k = -x^(k-ell) * sum m_i x^i for k >= ell
        for k in (ell..2 * ell - 1).rev() {
            let c = prod[k];
            if c == 0 {
                continue;
            }
            for (i, mi) in self.0.modulus.iter().enumerate() {
                let t = k - ell + i;
                prod[t] = sub_mod(prod[t], mul_mod(c, *mi, m), m);
            }
        }
        self.raw(prod[..ell].iter().copied().collect())
    }

    /// Largest `i <= v` with every coefficient divisible by `p^i`; `v` exactly for zero.
    pub fn valuation(&self, x: &RingElement) -> u32 {
        let v = self.length();
        let p = self.p() as u128;
        let mut best = v;
        for &c in &x.coeffs {
            if c == 0 {
                continue;
            }
            let mut c = c;
            let mut k = 0;
            while k < best && c % p == 0 {
                c /= p;
                k += 1;
            }
            best = best.min(k);
            if best == 0 {
                break;
            }
        }
        best
    }

    pub fn is_unit(&self, x: &RingElement) -> bool {
        self.valuation(x) == 0
    }

    /// `x` annihilates some nonzero element. Every nonzero ideal contains
    /// `p^(v-1)`, so it suffices to test `x * p^(v-1) = 0`.
    pub fn is_zero_divisor(&self, x: &RingElement) -> bool {
        let socle = self.from_int(self.p_power(self.length() - 1) as i128);
        self.mul_unchecked(x, &socle).is_zero()
    }

    /// Canonical representatives of `R / p^a`: coefficient vectors in `[0, p^a)`,
    /// in index order (`c_0` varies fastest).
    pub fn coset_representatives(&self, a: u32) -> Result<Vec<RingElement>> {
        if a == 0 || a > self.length() {
            return Err(invalid(format!("coset level {a} outside [1, {}]", self.length())));
        }
        let base = self.p_power(a);
        let count = (self.residue_size() as u128)
            .checked_pow(a)
            .filter(|c| *c <= u64::MAX as u128)
            .ok_or_else(|| invalid("too many coset representatives"))?;
        Ok((0..count).map(|idx| self.raw(digits(idx, base, self.ell() as usize))).collect())
    }

    /// All elements in index order.
    pub fn elements(&self) -> Result<Vec<RingElement>> {
        self.coset_representatives(self.length())
    }

    /// Position of `x` in [`ChainRing::elements`].
    pub fn index_of(&self, x: &RingElement) -> u128 {
        let base = self.pv();
        x.coeffs.iter().rev().fold(0u128, |acc, c| acc * base + c)
    }

    pub fn satisfies(&self, set: &RingSubset, condition: Condition) -> Result<bool> {
        check_condition(self, set, condition)
    }

    /// Parses `"3"`, `"-1"` or a coefficient vector `"[3,1]"` (meaning `3 + x`).
    pub fn parse_element(&self, text: &str) -> Result<RingElement> {
        let t = text.trim();
        if let Some(inner) = t.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let coeffs = inner
                .split(',')
                .map(|s| s.trim().parse::<i128>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            self.from_coeffs(&coeffs)
        } else {
            t.parse::<i128>().map(|n| self.from_int(n)).map_err(|e| Error::Parse(format!("{t:?}: {e}")))
        }
    }
}

/// Conditions (F) and (D). In a chain ring they coincide; they are computed
/// by different routes (valuation vs. annihilator) so the coincidence is checked.
pub fn check_condition(ring: &ChainRing, set: &RingSubset, condition: Condition) -> Result<bool> {
    if set.is_empty() {
        return Err(invalid("condition check on an empty set"));
    }
    if set.ring != ring.id() {
        return Err(Error::MixedRings { left: ring.id(), right: set.ring });
    }
    let els = set.elements();
    for (i, x) in els.iter().enumerate() {
        for y in &els[i + 1..] {
            let d = ring.sub_unchecked(x, y);
            let ok = match condition {
                Condition::F => ring.is_unit(&d),
                Condition::D => !ring.is_zero_divisor(&d),
            };
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Element of a [`ChainRing`], tagged with the ring's identity.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RingElement {
    ring: RingId,
    coeffs: Coeffs,
}

impl RingElement {
    pub fn ring_id(&self) -> RingId {
        self.ring
    }
    /// Coefficients `c_0..c_{ell-1}`, each in `[0, p^v)`.
    pub fn coeffs(&self) -> &[u128] {
        &self.coeffs
    }
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }
}

/// Index order: compares `c_{ell-1}` first.
impl Ord for RingElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ring.cmp(&other.ring).then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}
impl PartialOrd for RingElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `3` for `ell = 1`, `[3,1]` otherwise.
impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.len() == 1 {
            write!(f, "{}", self.coeffs[0])
        } else {
            let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
            write!(f, "[{}]", parts.join(","))
        }
    }
}

/// Finite set of distinct elements of one ring, in insertion order.
#[derive(Clone, Debug)]
pub struct RingSubset {
    ring: RingId,
    elements: Vec<RingElement>,
}

impl PartialEq for RingSubset {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.sorted() == other.sorted()
    }
}
impl Eq for RingSubset {}
impl Hash for RingSubset {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ring.hash(state);
        self.sorted().hash(state);
    }
}

impl RingSubset {
    pub fn new(ring: &ChainRing, elements: Vec<RingElement>) -> Result<Self> {
        for (i, x) in elements.iter().enumerate() {
            ring.check(x)?;
            if elements[..i].contains(x) {
                return Err(invalid(format!("duplicate element {x} in subset")));
            }
        }
        Ok(RingSubset { ring: ring.id(), elements })
    }

    pub fn from_ints(ring: &ChainRing, values: &[i128]) -> Result<Self> {
        Self::new(ring, values.iter().map(|v| ring.from_int(*v)).collect())
    }

    pub fn ring_id(&self) -> RingId {
        self.ring
    }
    pub fn len(&self) -> usize {
        self.elements.len()
    }
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
    pub fn elements(&self) -> &[RingElement] {
        &self.elements
    }
    pub fn iter(&self) -> std::slice::Iter<'_, RingElement> {
        self.elements.iter()
    }
    pub fn contains(&self, x: &RingElement) -> bool {
        self.elements.contains(x)
    }
    fn sorted(&self) -> Vec<&RingElement> {
        let mut v: Vec<_> = self.elements.iter().collect();
        v.sort();
        v
    }
}

impl fmt::Display for RingSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements.iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn fits(p: u64, v: u32) -> bool {
    let mut acc = 1u128;
    for _ in 0..v {
        match acc.checked_mul(p as u128) {
            Some(x) if x < (1u128 << MAX_MODULUS_BITS) => acc = x,
            _ => return false,
        }
    }
    true
}

fn digits(mut idx: u128, base: u128, len: usize) -> Coeffs {
    let mut out: Coeffs = SmallVec::with_capacity(len);
    for _ in 0..len {
        out.push(idx % base);
        idx /= base;
    }
    out
}

fn reduce_signed(n: i128, m: u128) -> u128 {
    if n >= 0 {
        (n as u128) % m
    } else {
        let r = n.unsigned_abs() % m;
        if r == 0 {
            0
        } else {
            m - r
        }
    }
}

#[inline]
fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u128, b: u128, m: u128) -> u128 {
    if a >= b {
        a - b
    } else {
        a + m - b
    }
}

#[inline]
fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u32::MAX as u128 {
        ((a as u64 * b as u64) % m as u64) as u128
    } else if a <= u64::MAX as u128 && b <= u64::MAX as u128 {
        (a * b) % m
    } else {
        // m < 2^126, so doubling never overflows
        let (mut a, mut b, mut acc) = (a % m, b % m, 0u128);
        while b > 0 {
            if b & 1 == 1 {
                acc = add_mod(acc, a, m);
            }
            a = add_mod(a, a, m);
            b >>= 1;
        }
        acc
    }
}

// --- polynomials over F_p, used only to pick the modulus ---

fn poly_rem_monic(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, bc) in b.iter().enumerate() {
                let t = &mut r[shift + i];
                *t = (*t + p - (lead * bc) % p) % p;
            }
        }
        r.pop();
    }
    while r.last() == Some(&0) {
        r.pop();
    }
    r
}

fn monic_from_index(mut k: u64, p: u64, deg: usize) -> Vec<u64> {
    let mut f = Vec::with_capacity(deg + 1);
    for _ in 0..deg {
        f.push(k % p);
        k /= p;
    }
    f.push(1);
    f
}

/// Irreducibility over `F_p` by trial division with every monic polynomial of degree `<= deg/2`.
pub(crate) fn is_irreducible_mod_p(f: &[u64], p: u64) -> bool {
    let deg = f.len() - 1;
    for d in 1..=deg / 2 {
        for k in 0..p.pow(d as u32) {
            let g = monic_from_index(k, p, d);
            if poly_rem_monic(f, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Low coefficients of the first monic irreducible of degree `deg` in index order.
fn smallest_irreducible(p: u64, deg: usize) -> Option<Vec<u64>> {
    let count = p.checked_pow(deg as u32)?;
    (0..count).map(|k| monic_from_index(k, p, deg)).find(|f| is_irreducible_mod_p(f, p)).map(|mut f| {
        f.pop();
        f
    })
}

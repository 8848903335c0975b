//! Sparse multivariate polynomials over a [`ChainRing`].
//!
//! Terms are keyed by exponent vector and zero coefficients are never stored,
//! so two polynomials are equal exactly when their term maps are.

use std::collections::BTreeMap;
use std::fmt;

use crate::chainring::{ChainRing, RingElement};
use crate::error::{invalid, Error, Result};

pub type Exponents = Vec<u32>;

#[derive(Clone, PartialEq, Eq)]
pub struct MPoly {
    ring: ChainRing,
    nvars: usize,
    terms: BTreeMap<Exponents, RingElement>,
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MPoly[{}; {} vars]({})", self.ring, self.nvars, self)
    }
}

impl MPoly {
    pub fn zero(ring: &ChainRing, nvars: usize) -> Self {
        MPoly { ring: ring.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(ring: &ChainRing, nvars: usize, c: RingElement) -> Result<Self> {
        Self::from_terms(ring, nvars, vec![(vec![0; nvars], c)])
    }

    /// The variable `t_{i+1}` (0-based index `i`).
    pub fn var(ring: &ChainRing, nvars: usize, i: usize) -> Result<Self> {
        if i >= nvars {
            return Err(Error::DimensionMismatch { expected: nvars, actual: i + 1 });
        }
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::from_terms(ring, nvars, vec![(e, ring.one())])
    }

    /// Sums the given terms; repeated exponent vectors are combined.
    pub fn from_terms(ring: &ChainRing, nvars: usize, terms: Vec<(Exponents, RingElement)>) -> Result<Self> {
        let mut out = Self::zero(ring, nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, actual: e.len() });
            }
            if !ring.contains(&c) {
                return Err(Error::MixedRings { left: ring.id(), right: c.ring_id() });
            }
            out.add_term(e, c);
        }
        Ok(out)
    }

    fn add_term(&mut self, e: Exponents, c: RingElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(existing) => {
                let s = self.ring.add_unchecked(existing, &c);
                if s.is_zero() {
                    self.terms.remove(&e);
                } else {
                    *existing = s;
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }
    pub fn nvars(&self) -> usize {
        self.nvars
    }
    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &RingElement)> {
        self.terms.iter()
    }
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Maximum exponent sum over stored terms; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<RingElement> {
        match self.total_degree() {
            None => Some(self.ring.zero()),
            Some(0) => self.terms.values().next().cloned(),
            Some(_) => None,
        }
    }

    fn compatible(&self, other: &MPoly) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::MixedRings { left: self.ring.id(), right: other.ring.id() });
        }
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, actual: other.nvars });
        }
        Ok(())
    }

    pub fn add(&self, other: &MPoly) -> Result<MPoly> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> MPoly {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), self.ring.neg_unchecked(c))).collect();
        MPoly { ring: self.ring.clone(), nvars: self.nvars, terms }
    }

    pub fn sub(&self, other: &MPoly) -> Result<MPoly> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MPoly) -> Result<MPoly> {
        self.compatible(other)?;
        let mut out = Self::zero(&self.ring, self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                out.add_term(e, self.ring.mul_unchecked(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<MPoly> {
        let mut acc = Self::constant(&self.ring, self.nvars, self.ring.one())?;
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// `c * self`.
    pub fn scale(&self, c: &RingElement) -> Result<MPoly> {
        let cp = Self::constant(&self.ring, self.nvars, c.clone())?;
        self.mul(&cp)
    }

    pub fn eval(&self, point: &[RingElement]) -> Result<RingElement> {
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, actual: point.len() });
        }
        for x in point {
            if !self.ring.contains(x) {
                return Err(Error::MixedRings { left: self.ring.id(), right: x.ring_id() });
            }
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[RingElement]) -> RingElement {
        let r = &self.ring;
        let mut acc = r.zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    t = r.mul_unchecked(&t, x);
                }
            }
            acc = r.add_unchecked(&acc, &t);
        }
        acc
    }

    /// Reinterprets the coefficients in a ring with the same residue field
    /// (quotient map or canonical lift, see [`ChainRing::transfer`]).
    pub fn transfer(&self, target: &ChainRing) -> Result<MPoly> {
        let terms = self.terms.iter().map(|(e, c)| Ok((e.clone(), target.transfer(c)?))).collect::<Result<Vec<_>>>()?;
        Self::from_terms(target, self.nvars, terms)
    }

    /// Parses the text grammar described on [`parse_poly`].
    pub fn parse(ring: &ChainRing, nvars: usize, text: &str) -> Result<MPoly> {
        parse_poly(ring, nvars, text)
    }
}

/// Expanded product of `fs`; the empty product is the constant 1.
pub fn poly_product_expand(ring: &ChainRing, nvars: usize, fs: &[MPoly]) -> Result<MPoly> {
    let mut acc = MPoly::constant(ring, nvars, ring.one())?;
    for f in fs {
        acc = acc.mul(f)?;
    }
    Ok(acc)
}

/// Terms in increasing exponent order, e.g. `3 + [1,1]*t1^2*t2`; the
/// coefficient is omitted when it is 1.
impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let one = self.ring.one();
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| if *k == 1 { format!("t{}", i + 1) } else { format!("t{}^{}", i + 1, k) })
                .collect();
            if mono.is_empty() {
                write!(f, "{c}")?;
            } else if *c == one {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", c, mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Parses a polynomial.
///
/// ```text
/// poly   := ['+'|'-'] term (('+'|'-') term)*
/// term   := factor ('*' factor)*
/// factor := atom ['^' int]
/// atom   := int | '[' int (',' int)* ']' | 't' [int] | '(' poly ')'
/// ```
///
/// `t` alone means `t1`; variables are numbered from 1.
pub fn parse_poly(ring: &ChainRing, nvars: usize, text: &str) -> Result<MPoly> {
    let mut p = Parser { ring, nvars, src: text.as_bytes(), pos: 0 };
    let out = p.poly()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(out)
}

struct Parser<'a> {
    ring: &'a ChainRing,
    nvars: usize,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {} in {:?}", self.pos, String::from_utf8_lossy(self.src)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i128> {
        self.skip_ws();
        let start = self.pos;
        if self.pos < self.src.len() && self.src[self.pos] == b'-' {
            self.pos += 1;
        }
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.error("expected an integer"))
    }

    fn poly(&mut self) -> Result<MPoly> {
        let mut negate = false;
        if self.eat(b'-') {
            negate = true;
        } else {
            self.eat(b'+');
        }
        let first = self.term()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?)?;
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<MPoly> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<MPoly> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.int()?;
            let e = u32::try_from(e).map_err(|_| self.error("exponent must be a non-negative integer"))?;
            base.pow(e)
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<MPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.poly()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'[') => {
                self.pos += 1;
                let mut coeffs = vec![self.int()?];
                while self.eat(b',') {
                    coeffs.push(self.int()?);
                }
                if !self.eat(b']') {
                    return Err(self.error("expected ']'"));
                }
                MPoly::constant(self.ring, self.nvars, self.ring.from_coeffs(&coeffs)?)
            }
            Some(b't') => {
                self.pos += 1;
                let index = if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) { self.int()? } else { 1 };
                if index < 1 || index as usize > self.nvars {
                    return Err(invalid(format!("variable t{index} outside t1..t{}", self.nvars)));
                }
                MPoly::var(self.ring, self.nvars, index as usize - 1)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.int()?;
                MPoly::constant(self.ring, self.nvars, self.ring.from_int(n))
            }
            _ => Err(self.error("expected a coefficient, variable or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chainring::make_chain_ring;
    use proptest::prelude::*;

    fn z(m: u32) -> ChainRing {
        make_chain_ring(2, 1, m).unwrap()
    }

    fn ints(r: &ChainRing, xs: &[i128]) -> Vec<RingElement> {
        xs.iter().map(|x| r.from_int(*x)).collect()
    }

    #[test]
    fn eval_examples() {
        let z4 = z(2);
        let f = parse_poly(&z4, 2, "t1+t2").unwrap();
        assert!(f.eval(&ints(&z4, &[1, 3])).unwrap().is_zero());
        let z8 = z(3);
        let f = parse_poly(&z8, 1, "t1^2").unwrap();
        assert_eq!(f.eval(&ints(&z8, &[2])).unwrap(), z8.from_int(4));
        let f = parse_poly(&z4, 2, "2*t1*t2 + 3").unwrap();
        assert_eq!(f.eval(&ints(&z4, &[1, 1])).unwrap(), z4.from_int(1));
        assert!(f.eval(&ints(&z4, &[1])).is_err());
    }

    #[test]
    fn degree_examples() {
        let z4 = z(2);
        assert_eq!(parse_poly(&z4, 3, "t1*t2 + t3").unwrap().total_degree(), Some(2));
        assert_eq!(MPoly::zero(&z4, 2).total_degree(), None);
        assert_eq!(parse_poly(&z4, 1, "2*t1^3").unwrap().total_degree(), Some(3));
        assert_eq!(parse_poly(&z4, 1, "4*t1^3").unwrap().total_degree(), None);
    }

    #[test]
    fn product_examples() {
        let z4 = z(2);
        let fs = [parse_poly(&z4, 1, "t1-1").unwrap(), parse_poly(&z4, 1, "t1+1").unwrap()];
        let prod = poly_product_expand(&z4, 1, &fs).unwrap();
        assert_eq!(prod, parse_poly(&z4, 1, "t1^2 + 3").unwrap());

        let two_t = parse_poly(&z4, 1, "2*t1").unwrap();
        let prod = poly_product_expand(&z4, 1, &[two_t.clone(), two_t]).unwrap();
        assert!(prod.is_zero());
        assert_eq!(prod.total_degree(), None);

        let one = poly_product_expand(&z4, 2, &[]).unwrap();
        assert_eq!(one.as_constant(), Some(z4.one()));
    }

    #[test]
    fn mixed_rings_rejected() {
        let a = parse_poly(&z(2), 1, "t1").unwrap();
        let b = parse_poly(&z(3), 1, "t1").unwrap();
        assert!(matches!(a.mul(&b), Err(Error::MixedRings { .. })));
    }

    #[test]
    fn parser_features() {
        let gr = make_chain_ring(2, 2, 2).unwrap();
        let f = parse_poly(&gr, 2, "[1,1]*t1^2*t2 - (t2 + 1)^2").unwrap();
        assert_eq!(f.total_degree(), Some(3));
        assert_eq!(parse_poly(&gr, 1, "t").unwrap(), MPoly::var(&gr, 1, 0).unwrap());
        assert!(parse_poly(&gr, 1, "t2").is_err());
        assert!(parse_poly(&gr, 1, "t1 +").is_err());
        assert!(parse_poly(&gr, 1, "(t1").is_err());
        assert!(parse_poly(&gr, 1, "t1 t1").is_err());
    }

    #[test]
    fn transfer_reduces_coefficients() {
        let f = parse_poly(&z(3), 1, "6*t1 + 2").unwrap();
        let g = f.transfer(&z(1)).unwrap();
        assert!(g.is_zero());
    }

    fn arb_poly(nvars: usize) -> impl Strategy<Value = Vec<(Vec<u32>, i128)>> {
        prop::collection::vec((prop::collection::vec(0u32..3, nvars), -20i128..20), 0..6)
    }

    fn build(r: &ChainRing, nvars: usize, t: Vec<(Vec<u32>, i128)>) -> MPoly {
        MPoly::from_terms(r, nvars, t.into_iter().map(|(e, c)| (e, r.from_int(c))).collect()).unwrap()
    }

    proptest! {
        #[test]
        fn display_roundtrips(t in arb_poly(3), c1 in -9i128..9) {
            let gr = make_chain_ring(3, 2, 2).unwrap();
            let mut f = build(&gr, 3, t);
            let lin = MPoly::from_terms(&gr, 3, vec![(vec![1, 0, 0], gr.from_coeffs(&[c1, 1]).unwrap())]).unwrap();
            f = f.add(&lin).unwrap();
            let back = parse_poly(&gr, 3, &f.to_string()).unwrap();
            prop_assert_eq!(back, f);
        }

        #[test]
        fn eval_is_multiplicative(a in arb_poly(2), b in arb_poly(2), x in 0i128..9, y in 0i128..9) {
            let r = make_chain_ring(3, 1, 2).unwrap();
            let (f, g) = (build(&r, 2, a), build(&r, 2, b));
            let pt = ints(&r, &[x, y]);
            let fg = f.mul(&g).unwrap();
            prop_assert_eq!(
                fg.eval(&pt).unwrap(),
                r.mul(&f.eval(&pt).unwrap(), &g.eval(&pt).unwrap()).unwrap()
            );
            let s = f.add(&g).unwrap();
            prop_assert_eq!(
                s.eval(&pt).unwrap(),
                r.add(&f.eval(&pt).unwrap(), &g.eval(&pt).unwrap()).unwrap()
            );
        }

        #[test]
        fn product_degree_bound(a in arb_poly(2), b in arb_poly(2)) {
            let r = make_chain_ring(2, 1, 2).unwrap();
            let (f, g) = (build(&r, 2, a), build(&r, 2, b));
            let fg = f.mul(&g).unwrap();
            if let (Some(df), Some(dg)) = (f.total_degree(), g.total_degree()) {
                if let Some(d) = fg.total_degree() {
                    prop_assert!(d <= df + dg);
                }
            } else {
                prop_assert!(fg.is_zero());
            }
        }
    }
}

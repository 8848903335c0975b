//! Interpolation with fat targets: polynomials `f = sum c_i f_i` with
//! coefficients in prescribed sets and values at nodes landing in prescribed
//! residue sets, counted through linear evaluation forms.

use num_bigint::BigUint;
use num_rational::Ratio;

use crate::chainring::{check_condition, make_chain_ring, ChainRing, Condition, RingElement, RingSubset};
use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::mpoly::MPoly;
use crate::warning::{verify_main_theorem, RestrictedSystem, VerificationReport};
use crate::Budget;

#[derive(Clone, Debug)]
pub struct InterpolationProblem {
    ring: ChainRing,
    basis: Vec<MPoly>,
    coeff_sets: Vec<RingSubset>,
    nodes: Vec<Vec<RingElement>>,
    exponents: Vec<u32>,
    targets: Vec<RingSubset>,
}

impl InterpolationProblem {
    pub fn new(
        ring: &ChainRing,
        basis: Vec<MPoly>,
        coeff_sets: Vec<RingSubset>,
        nodes: Vec<Vec<RingElement>>,
        exponents: Vec<u32>,
        targets: Vec<RingSubset>,
    ) -> Result<Self> {
        if basis.is_empty() {
            return Err(invalid("the basis is empty"));
        }
        let nvars = basis[0].nvars();
        if let Some(f) = basis.iter().find(|f| f.nvars() != nvars || f.ring() != ring) {
            return Err(invalid(format!("basis element {f} does not match the ring or variable count")));
        }
        if coeff_sets.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), actual: coeff_sets.len() });
        }
        if nodes.len() != exponents.len() || nodes.len() != targets.len() {
            return Err(invalid("nodes, exponents and targets do not line up"));
        }
        for x in &nodes {
            if x.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, actual: x.len() });
            }
            if let Some(c) = x.iter().find(|c| !ring.contains(c)) {
                return Err(Error::MixedRings { left: ring.id(), right: c.ring_id() });
            }
        }
        for (i, x) in nodes.iter().enumerate() {
            if nodes[..i].contains(x) {
                return Err(invalid("repeated node"));
            }
        }
        for set in coeff_sets.iter().chain(&targets) {
            if set.is_empty() || set.ring_id() != ring.id() {
                return Err(invalid(format!("set {set} is empty or lives in another ring")));
            }
            if !check_condition(ring, set, Condition::F)? {
                return Err(Error::Hypothesis(format!("{set} has two elements congruent mod p")));
            }
        }
        if let Some(&v) = exponents.iter().find(|&&v| v < 1 || v > ring.length()) {
            return Err(invalid(format!("exponent {v} outside [1, {}]", ring.length())));
        }
        let p = InterpolationProblem { ring: ring.clone(), basis, coeff_sets, nodes, exponents, targets };
        if let Some(c) = p.dependency()? {
            let shown: Vec<String> = c.iter().map(|e| e.to_string()).collect();
            return Err(Error::Hypothesis(format!("the basis is linearly dependent: ({})", shown.join(", "))));
        }
        Ok(p)
    }

    /// Univariate basis `1, t, .., t^deg`.
    pub fn monomial_basis(ring: &ChainRing, deg: u32) -> Result<Vec<MPoly>> {
        let t = MPoly::var(ring, 1, 0)?;
        (0..=deg).map(|k| t.pow(k)).collect()
    }

    pub fn ring(&self) -> &ChainRing {
        &self.ring
    }
    pub fn basis(&self) -> &[MPoly] {
        &self.basis
    }
    pub fn coeff_sets(&self) -> &[RingSubset] {
        &self.coeff_sets
    }
    pub fn nodes(&self) -> &[Vec<RingElement>] {
        &self.nodes
    }
    pub fn targets(&self) -> &[RingSubset] {
        &self.targets
    }
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// A nonzero `c` with `sum c_i f_i = 0`, if any. Scaling a relation by
    /// a power of `p` pushes it into the socle `p^{v-1} R`, so only socle
    /// vectors need checking.
    fn dependency(&self) -> Result<Option<Vec<RingElement>>> {
        let ring = &self.ring;
        let pv = ring.from_int(ring.p_power(ring.length() - 1) as i128);
        let socle: Vec<RingElement> =
            ring.coset_representatives(1)?.iter().map(|r| ring.mul(r, &pv)).collect::<Result<_>>()?;
        let n = self.basis.len();
        let radices = vec![socle.len(); n];
        let budget = Budget::default();
        let hit = grid::find_first_point(&radices, budget, |d| {
            if d.iter().all(|&k| k == 0) {
                return false;
            }
            let mut acc = MPoly::zero(ring, self.basis[0].nvars());
            for (&k, f) in d.iter().zip(&self.basis) {
                if k != 0 {
                    acc = acc.add(&f.scale(&socle[k]).expect("same ring")).expect("same ring");
                }
            }
            acc.is_zero()
        })?;
        Ok(hit.map(|d| d.iter().map(|&k| socle[k].clone()).collect()))
    }

    /// `L_j(c) = sum_i f_i(x_j) c_i` as degree-1 polynomials in `c`.
    pub fn evaluation_forms(&self) -> Result<Vec<MPoly>> {
        let n = self.basis.len();
        self.nodes
            .iter()
            .map(|x| {
                let terms = self
                    .basis
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        let mut e = vec![0; n];
                        e[i] = 1;
                        Ok((e, f.eval(x)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                MPoly::from_terms(&self.ring, n, terms)
            })
            .collect()
    }

    /// The system in coefficient space the counting theorem is applied to.
    pub fn coefficient_system(&self) -> Result<RestrictedSystem> {
        RestrictedSystem::new(
            &self.ring,
            self.coeff_sets.clone(),
            self.evaluation_forms()?,
            self.exponents.clone(),
            self.targets.clone(),
        )
    }

    /// `sum #A_i - sum_j (q^{v_j} - #B_j)`.
    pub fn bound_argument(&self) -> i128 {
        let q = self.ring.residue_size() as i128;
        let a: i128 = self.coeff_sets.iter().map(|s| s.len() as i128).sum();
        let cost: i128 = self.exponents.iter().zip(&self.targets).map(|(&v, b)| q.pow(v) - b.len() as i128).sum();
        a - cost
    }

    /// `f = sum c_i f_i`.
    pub fn combine(&self, c: &[RingElement]) -> Result<MPoly> {
        let mut acc = MPoly::zero(&self.ring, self.basis[0].nvars());
        for (ci, f) in c.iter().zip(&self.basis) {
            acc = acc.add(&f.scale(ci)?)?;
        }
        Ok(acc)
    }

    /// `f(x_j) in B_j mod p^{v_j}` for every node.
    pub fn satisfies(&self, f: &MPoly) -> Result<bool> {
        for ((x, &v), b) in self.nodes.iter().zip(&self.exponents).zip(&self.targets) {
            let y = f.eval(x)?;
            let mut ok = false;
            for t in b.iter() {
                if self.ring.valuation(&self.ring.sub(&y, t)?) >= v {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn radices(&self) -> Vec<usize> {
        self.coeff_sets.iter().map(RingSubset::len).collect()
    }

    fn point(&self, d: &[usize]) -> Vec<RingElement> {
        d.iter().zip(&self.coeff_sets).map(|(&k, a)| a.elements()[k].clone()).collect()
    }
}

/// Count of `S` through the evaluation forms, with the polynomial-side count
/// alongside.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpReport {
    pub report: VerificationReport,
    /// `#S` by building each `f` and evaluating it at the nodes.
    pub direct: BigUint,
}

/// `#S` checked against `m(#A_1..#A_n; sum #A_i - sum_j (q^{v_j} - #B_j))`.
pub fn interp_count(p: &InterpolationProblem, budget: Budget) -> Result<InterpReport> {
    let report = verify_main_theorem(&p.coefficient_system()?, budget)?;
    let direct = count_interpolants_direct(p, budget)?;
    if direct != report.count {
        return Err(Error::Internal(format!(
            "interpolant count {direct} differs from the coefficient-space count {}",
            report.count
        )));
    }
    Ok(InterpReport { report, direct })
}

/// `#S` by enumerating coefficient vectors and evaluating `sum c_i f_i`.
pub fn count_interpolants_direct(p: &InterpolationProblem, budget: Budget) -> Result<BigUint> {
    let n = grid::count_points(&p.radices(), budget, |d| {
        let f = p.combine(&p.point(d)).expect("same ring");
        p.satisfies(&f).expect("same ring")
    })?;
    Ok(BigUint::from(n))
}

/// The first nonzero coefficient vector in `S` (grid order, first
/// coordinate fastest). Needs `0` in every `A_i` and `B_j`. When the bound
/// argument exceeds `n` a solution must exist and failing to find one is
/// an internal error.
pub fn find_nonzero_interpolant(p: &InterpolationProblem, budget: Budget) -> Result<Option<Vec<RingElement>>> {
    let zero = p.ring.zero();
    if p.coeff_sets.iter().chain(&p.targets).any(|s| !s.contains(&zero)) {
        return Err(Error::Hypothesis("0 must lie in every coefficient and target set".into()));
    }
    let found = grid::find_first_point(&p.radices(), budget, |d| {
        let c = p.point(d);
        if c.iter().all(RingElement::is_zero) {
            return false;
        }
        p.satisfies(&p.combine(&c).expect("same ring")).expect("same ring")
    })?;
    let guaranteed = p.bound_argument() > p.basis.len() as i128;
    if found.is_none() && guaranteed {
        return Err(Error::Internal("the bound guarantees a nonzero interpolant but none exists".into()));
    }
    Ok(found.map(|d| p.point(&d)))
}

/// Outcome of the minimal-degree search for `f(0) = 0`, `f(x) in B_x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TroiZannier {
    pub q: u64,
    /// `S = sum_x #B_x`.
    pub target_mass: u64,
    /// The closed form `q - (S - 1)/(q - 1)`.
    pub displayed_bound: Ratio<i64>,
    /// Least `n` with `n(q - 1) > q(q - 1) - S`, the degree at which the
    /// counting argument forces a nonzero interpolant.
    pub criterion_degree: u64,
    pub min_degree: u64,
    /// Coefficients `c_0..c_{min_degree}` of the first witness found.
    pub witness: Vec<RingElement>,
}

impl TroiZannier {
    pub fn criterion_holds(&self) -> bool {
        self.min_degree <= self.criterion_degree
    }

    /// `min_degree <= q - (S - 1)/(q - 1)`; fails when the closed form is
    /// below the least integer it rounds up to.
    pub fn displayed_bound_holds(&self) -> bool {
        Ratio::from_integer(self.min_degree as i64) <= self.displayed_bound
    }
}

/// Parses `"1:0,1;2:0"`: node, then its target set.
pub fn parse_targets(ring: &ChainRing, text: &str) -> Result<Vec<(RingElement, RingSubset)>> {
    text.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|part| {
            let (x, set) = part.split_once(':').ok_or_else(|| Error::Parse(format!("{part:?} is not x:B")))?;
            let x = ring.parse_element(x.trim())?;
            let els = split_top_level(set).iter().map(|e| ring.parse_element(e)).collect::<Result<Vec<_>>>()?;
            Ok((x, RingSubset::new(ring, els)?))
        })
        .collect()
}

/// Splits on commas outside square brackets.
fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Minimal degree of a nonzero `f in F_q[t]` with `f(0) = 0` and
/// `f(x) in B_x` for every nonzero `x`, searched degree by degree through
/// [`find_nonzero_interpolant`]. `t^q - t` always qualifies, so the search
/// stops by degree `q`.
pub fn troi_zannier(ring: &ChainRing, targets: &[(RingElement, RingSubset)], budget: Budget) -> Result<TroiZannier> {
    if ring.length() != 1 {
        return Err(invalid("troi-zannier works over a finite field (length 1)"));
    }
    let q = ring.residue_size();
    let nonzero: Vec<RingElement> = ring.elements()?.into_iter().filter(|x| !x.is_zero()).collect();
    let mut by_node = Vec::with_capacity(nonzero.len());
    for x in &nonzero {
        let hits: Vec<&RingSubset> = targets.iter().filter(|(y, _)| y == x).map(|(_, b)| b).collect();
        match hits.as_slice() {
            [b] => by_node.push((*b).clone()),
            [] => return Err(invalid(format!("no target set for x = {x}"))),
            _ => return Err(invalid(format!("x = {x} has several target sets"))),
        }
    }
    if let Some((x, _)) = targets.iter().find(|(x, _)| x.is_zero() || !ring.contains(x)) {
        return Err(invalid(format!("target node {x} is not a nonzero field element")));
    }
    let mass: u64 = by_node.iter().map(|b| b.len() as u64).sum();
    let qi = q as i64;
    let displayed_bound = Ratio::from_integer(qi) - Ratio::new(mass as i64 - 1, qi - 1);
    let criterion_degree = (1..=q).find(|&n| n * (q - 1) > q * (q - 1) - mass).unwrap_or(q);

    let mut nodes = vec![vec![ring.zero()]];
    nodes.extend(nonzero.iter().map(|x| vec![x.clone()]));
    let mut outs = vec![RingSubset::new(ring, vec![ring.zero()])?];
    outs.extend(by_node);
    let field = RingSubset::new(ring, ring.elements()?)?;
    for deg in 1..=q as u32 {
        let basis = InterpolationProblem::monomial_basis(ring, deg)?;
        let p = InterpolationProblem::new(
            ring,
            basis,
            vec![field.clone(); deg as usize + 1],
            nodes.clone(),
            vec![1; nodes.len()],
            outs.clone(),
        )?;
        if let Some(c) = find_nonzero_interpolant(&p, budget)? {
            return Ok(TroiZannier {
                q,
                target_mass: mass,
                displayed_bound,
                criterion_degree,
                min_degree: deg as u64,
                witness: c,
            });
        }
    }
    Err(Error::Internal(format!("no nonzero interpolant of degree <= {q}, yet t^{q} - t qualifies")))
}

/// `F_q` as a chain ring, `q` a prime power.
pub fn finite_field(q: u64) -> Result<ChainRing> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d)).ok_or_else(|| invalid("q must be at least 2"))?;
    let mut ell = 0;
    let mut rest = q;
    while rest.is_multiple_of(p) {
        rest /= p;
        ell += 1;
    }
    if rest != 1 {
        return Err(invalid(format!("{q} is not a prime power")));
    }
    make_chain_ring(p, ell, 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Budget {
        Budget::default()
    }

    fn sub(ring: &ChainRing, xs: &[i128]) -> RingSubset {
        RingSubset::from_ints(ring, xs).unwrap()
    }

    fn node(ring: &ChainRing, x: i128) -> Vec<RingElement> {
        vec![ring.from_int(x)]
    }

    #[test]
    fn linear_example_over_f2() {
        let f2 = finite_field(2).unwrap();
        let p = InterpolationProblem::new(
            &f2,
            InterpolationProblem::monomial_basis(&f2, 1).unwrap(),
            vec![sub(&f2, &[0, 1]); 2],
            vec![node(&f2, 0), node(&f2, 1)],
            vec![1, 1],
            vec![sub(&f2, &[0]), sub(&f2, &[0, 1])],
        )
        .unwrap();
        let r = interp_count(&p, b()).unwrap();
        assert_eq!(r.direct, 2u32.into());
        assert_eq!(r.report.bound, 2u32.into());
        assert!(r.report.holds);
    }

    #[test]
    fn full_targets_count_everything() {
        let f3 = finite_field(3).unwrap();
        let p = InterpolationProblem::new(
            &f3,
            InterpolationProblem::monomial_basis(&f3, 2).unwrap(),
            vec![sub(&f3, &[0, 1, 2]); 3],
            vec![node(&f3, 0), node(&f3, 1)],
            vec![1, 1],
            vec![sub(&f3, &[0, 1, 2]); 2],
        )
        .unwrap();
        assert_eq!(interp_count(&p, b()).unwrap().direct, 27u32.into());
    }

    #[test]
    fn quadratic_example_over_f3() {
        let f3 = finite_field(3).unwrap();
        let p = InterpolationProblem::new(
            &f3,
            InterpolationProblem::monomial_basis(&f3, 2).unwrap(),
            vec![sub(&f3, &[0, 1, 2]); 3],
            vec![node(&f3, 0), node(&f3, 1), node(&f3, 2)],
            vec![1; 3],
            vec![sub(&f3, &[0]), sub(&f3, &[0, 1]), sub(&f3, &[0])],
        )
        .unwrap();
        let r = interp_count(&p, b()).unwrap();
        // f(0) = 0, f(2) = 0 leave c t(t - 2); f(1) = -c in {0, 1}
        assert_eq!(r.direct, 2u32.into());
        assert_eq!(p.bound_argument(), 9 - 2 - 1 - 2);
        assert!(r.report.holds);
        let c = find_nonzero_interpolant(&p, b()).unwrap().unwrap();
        assert_eq!(c, vec![f3.zero(), f3.from_int(2), f3.from_int(2)]);
    }

    #[test]
    fn trivial_space_has_no_nonzero_interpolant() {
        let f2 = finite_field(2).unwrap();
        let p = InterpolationProblem::new(
            &f2,
            InterpolationProblem::monomial_basis(&f2, 1).unwrap(),
            vec![sub(&f2, &[0]); 2],
            vec![node(&f2, 0), node(&f2, 1)],
            vec![1, 1],
            vec![sub(&f2, &[0]); 2],
        )
        .unwrap();
        assert_eq!(find_nonzero_interpolant(&p, b()).unwrap(), None);
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let z4 = make_chain_ring(2, 1, 2).unwrap();
        let t = MPoly::var(&z4, 1, 0).unwrap();
        let two_t = t.scale(&z4.from_int(2)).unwrap();
        // 2 * (2t) = 0, so {t, 2t} is dependent
        let res = InterpolationProblem::new(
            &z4,
            vec![t.clone(), two_t],
            vec![sub(&z4, &[0, 1]); 2],
            vec![node(&z4, 1)],
            vec![1],
            vec![sub(&z4, &[0])],
        );
        assert!(matches!(res, Err(Error::Hypothesis(_))));
        // over Z/4 the monomials 1, t, t^2 stay independent
        assert!(InterpolationProblem::new(
            &z4,
            InterpolationProblem::monomial_basis(&z4, 2).unwrap(),
            vec![sub(&z4, &[0, 1]); 3],
            vec![node(&z4, 1)],
            vec![2],
            vec![sub(&z4, &[0])],
        )
        .is_ok());
    }

    #[test]
    fn troi_zannier_examples() {
        let f2 = finite_field(2).unwrap();
        let tz = troi_zannier(&f2, &parse_targets(&f2, "1:0,1").unwrap(), b()).unwrap();
        assert_eq!(tz.displayed_bound, Ratio::from_integer(1));
        assert_eq!(tz.min_degree, 1);
        assert_eq!(tz.witness, vec![f2.zero(), f2.one()]);

        let f3 = finite_field(3).unwrap();
        let tz = troi_zannier(&f3, &parse_targets(&f3, "1:0,1;2:0").unwrap(), b()).unwrap();
        assert_eq!((tz.min_degree, tz.criterion_degree), (2, 2));
        assert_eq!(tz.witness, vec![f3.zero(), f3.from_int(2), f3.from_int(2)]);

        let tz = troi_zannier(&f3, &parse_targets(&f3, "1:0,1,2;2:0,1,2").unwrap(), b()).unwrap();
        assert_eq!(tz.min_degree, 1);
        assert_eq!(tz.displayed_bound, Ratio::new(1, 2));
        assert!(tz.criterion_holds());
        assert!(!tz.displayed_bound_holds());
    }

    #[test]
    fn troi_zannier_over_f4() {
        let f4 = finite_field(4).unwrap();
        let tz = troi_zannier(&f4, &parse_targets(&f4, "1:0;[0,1]:0;[1,1]:0").unwrap(), b()).unwrap();
        // only multiples of t^4 - t vanish on all of F_4
        assert_eq!(tz.min_degree, 4);
        assert_eq!(tz.criterion_degree, 4);
        assert!(parse_targets(&f4, "1:0").is_ok());
        assert!(troi_zannier(&f4, &parse_targets(&f4, "1:0").unwrap(), b()).is_err());
    }
}

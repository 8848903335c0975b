use chainwarn::chainring::{check_condition, make_chain_ring, ChainRing, Condition, RingElement, RingSubset};
use proptest::prelude::*;

const RINGS: &[(u64, u32, u32)] = &[(2, 1, 3), (3, 1, 2), (2, 2, 2), (5, 1, 1), (3, 2, 2), (2, 3, 1), (7, 1, 2)];

fn ring(i: usize) -> ChainRing {
    let (p, ell, v) = RINGS[i];
    make_chain_ring(p, ell, v).unwrap()
}

fn elem(r: &ChainRing, coeffs: &[i128]) -> RingElement {
    r.from_coeffs(&coeffs[..r.ell() as usize]).unwrap()
}

fn arb_ring_and_elems(k: usize) -> impl Strategy<Value = (usize, Vec<Vec<i128>>)> {
    (0..RINGS.len(), prop::collection::vec(prop::collection::vec(-60i128..60, 3), k))
}

#[test]
fn sizes_and_enumeration() {
    for (i, &(p, ell, v)) in RINGS.iter().enumerate() {
        let r = ring(i);
        let q = p.pow(ell);
        let all = r.elements().unwrap();
        assert_eq!(all.len() as u64, q.pow(v));
        assert_eq!(r.size(), Some(q.pow(v)));
        assert_eq!(r.residue_size(), q);
        for (k, x) in all.iter().enumerate() {
            assert_eq!(r.index_of(x), k as u128);
        }
        // units are exactly the elements of valuation 0, and there are q^v - q^{v-1}
        let units = all.iter().filter(|x| r.is_unit(x)).count() as u64;
        assert_eq!(units, q.pow(v) - q.pow(v - 1));
        assert!(all.iter().all(|x| r.is_unit(x) == (r.valuation(x) == 0)));
        assert_eq!(r.valuation(&r.zero()), v);
        // p^a R has q^{v-a} elements
        for a in 0..=v {
            let n = all.iter().filter(|x| r.valuation(x) >= a).count() as u64;
            assert_eq!(n, q.pow(v - a));
        }
    }
}

#[test]
fn residue_field_is_a_field() {
    for i in 0..RINGS.len() {
        let r = ring(i).with_length(1).unwrap();
        let all = r.elements().unwrap();
        for x in all.iter().filter(|x| !x.is_zero()) {
            assert!(all.iter().any(|y| r.mul(x, y).unwrap() == r.one()), "{x} has no inverse in {r}");
        }
    }
}

#[test]
fn condition_f_means_distinct_residues() {
    let r = make_chain_ring(2, 2, 2).unwrap();
    let all = r.elements().unwrap();
    for (i, x) in all.iter().enumerate() {
        for y in &all[i + 1..] {
            let s = RingSubset::new(&r, vec![x.clone(), y.clone()]).unwrap();
            let f = check_condition(&r, &s, Condition::F).unwrap();
            assert_eq!(f, r.reduce_mod_power(x, 1) != r.reduce_mod_power(y, 1));
            // in a chain ring, non-zero-divisors are units
            assert_eq!(f, check_condition(&r, &s, Condition::D).unwrap());
        }
    }
}

#[test]
fn parse_forms() {
    let r = make_chain_ring(3, 2, 2).unwrap();
    assert_eq!(r.parse_element("-1").unwrap(), r.from_int(8));
    assert_eq!(r.parse_element("[1,2]").unwrap(), r.from_coeffs(&[1, 2]).unwrap());
    assert!(r.parse_element("[1,2,3]").is_err());
    assert!(r.parse_element("x").is_err());
    let x = r.from_coeffs(&[4, 7]).unwrap();
    assert_eq!(r.parse_element(&x.to_string()).unwrap(), x);
}

#[test]
fn mixed_rings_are_rejected() {
    let a = make_chain_ring(2, 1, 2).unwrap();
    let b = make_chain_ring(2, 1, 3).unwrap();
    assert!(a.add(&a.one(), &b.one()).is_err());
    assert!(RingSubset::new(&a, vec![b.one()]).is_err());
    assert!(make_chain_ring(4, 1, 1).is_err());
    assert!(make_chain_ring(2, 0, 1).is_err());
}

proptest! {
    #[test]
    fn commutative_ring_axioms((i, xs) in arb_ring_and_elems(3)) {
        let r = ring(i);
        let (a, b, c) = (elem(&r, &xs[0]), elem(&r, &xs[1]), elem(&r, &xs[2]));
        prop_assert_eq!(r.add(&a, &b).unwrap(), r.add(&b, &a).unwrap());
        prop_assert_eq!(r.mul(&a, &b).unwrap(), r.mul(&b, &a).unwrap());
        prop_assert_eq!(
            r.mul(&r.mul(&a, &b).unwrap(), &c).unwrap(),
            r.mul(&a, &r.mul(&b, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(
            r.mul(&a, &r.add(&b, &c).unwrap()).unwrap(),
            r.add(&r.mul(&a, &b).unwrap(), &r.mul(&a, &c).unwrap()).unwrap()
        );
        prop_assert_eq!(r.add(&a, &r.neg(&a).unwrap()).unwrap(), r.zero());
        prop_assert_eq!(r.sub(&a, &b).unwrap(), r.add(&a, &r.neg(&b).unwrap()).unwrap());
        prop_assert_eq!(r.mul(&a, &r.one()).unwrap(), a.clone());
        prop_assert_eq!(r.pow(&a, 3).unwrap(), r.mul(&a, &r.mul(&a, &a).unwrap()).unwrap());
    }

    #[test]
    fn valuation_rules((i, xs) in arb_ring_and_elems(2)) {
        let r = ring(i);
        let (a, b) = (elem(&r, &xs[0]), elem(&r, &xs[1]));
        let (va, vb) = (r.valuation(&a), r.valuation(&b));
        prop_assert_eq!(r.valuation(&r.mul(&a, &b).unwrap()), (va + vb).min(r.length()));
        prop_assert!(r.valuation(&r.add(&a, &b).unwrap()) >= va.min(vb));
        if va != vb {
            prop_assert_eq!(r.valuation(&r.add(&a, &b).unwrap()), va.min(vb));
        }
        prop_assert_eq!(r.is_zero_divisor(&a), va > 0);
    }

    #[test]
    fn reduction_is_a_homomorphism((i, xs) in arb_ring_and_elems(2), a in 1u32..4) {
        let r = ring(i);
        let a = a.min(r.length());
        let small = r.with_length(a).unwrap();
        let (x, y) = (elem(&r, &xs[0]), elem(&r, &xs[1]));
        let down = |z: &RingElement| small.transfer(z).unwrap();
        prop_assert_eq!(down(&r.mul(&x, &y).unwrap()), small.mul(&down(&x), &down(&y)).unwrap());
        prop_assert_eq!(down(&r.add(&x, &y).unwrap()), small.add(&down(&x), &down(&y)).unwrap());
        // x = y mod p^a exactly when ord(x - y) >= a
        let same = r.reduce_mod_power(&x, a) == r.reduce_mod_power(&y, a);
        prop_assert_eq!(same, r.valuation(&r.sub(&x, &y).unwrap()) >= a);
    }
}

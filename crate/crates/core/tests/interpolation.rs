use chainwarn::chainring::{make_chain_ring, ChainRing, RingElement, RingSubset};
use chainwarn::interp::{
    count_interpolants_direct, find_nonzero_interpolant, finite_field, interp_count, parse_targets, troi_zannier,
    InterpolationProblem,
};
use chainwarn::mpoly::{parse_poly, MPoly};
use chainwarn::sampling::{random_f_set, rng};
use chainwarn::Budget;
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::Rng;

fn horner(r: &ChainRing, c: &[RingElement], x: &RingElement) -> RingElement {
    c.iter().rev().fold(r.zero(), |acc, ci| r.add(&r.mul(&acc, x).unwrap(), ci).unwrap())
}

fn lands(r: &ChainRing, y: &RingElement, b: &RingSubset, v: u32) -> bool {
    b.iter().any(|t| r.valuation(&r.sub(y, t).unwrap()) >= v)
}

/// Univariate interpolants `sum c_i t^i` with `c in A_0 x .. x A_d`, counted
/// by nested loops and Horner evaluation.
fn univariate_oracle(r: &ChainRing, a: &[RingSubset], nodes: &[RingElement], v: &[u32], b: &[RingSubset]) -> u64 {
    let mut idx = vec![0usize; a.len()];
    let mut count = 0;
    loop {
        let c: Vec<RingElement> = idx.iter().zip(a).map(|(&i, s)| s.elements()[i].clone()).collect();
        if nodes.iter().zip(v).zip(b).all(|((x, &vj), bj)| lands(r, &horner(r, &c, x), bj, vj)) {
            count += 1;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return count;
            }
            idx[k] += 1;
            if idx[k] < a[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Least degree of a nonzero `f` with `f(0) = 0` and `f(x) in B_x`, by
/// walking coefficient vectors `(c_1, .., c_d)` for `d = 1, 2, ..`.
fn min_degree_oracle(field: &ChainRing, targets: &[(RingElement, RingSubset)]) -> u64 {
    let all = field.elements().unwrap();
    let q = all.len();
    for d in 1..=q {
        let total = q.pow(d as u32);
        for code in 1..total {
            let mut c = vec![field.zero()];
            let mut k = code;
            for _ in 0..d {
                c.push(all[k % q].clone());
                k /= q;
            }
            if targets.iter().all(|(x, b)| b.contains(&horner(field, &c, x))) {
                return d as u64;
            }
        }
    }
    unreachable!("t^q - t qualifies")
}

#[test]
fn dependent_bases_are_rejected() {
    let z4 = make_chain_ring(2, 1, 2).unwrap();
    let basis = vec![parse_poly(&z4, 1, "t1").unwrap(), parse_poly(&z4, 1, "2*t1").unwrap()];
    let a = RingSubset::from_ints(&z4, &[0, 1]).unwrap();
    let b = RingSubset::from_ints(&z4, &[0]).unwrap();
    let p = InterpolationProblem::new(
        &z4,
        basis,
        vec![a.clone(), a.clone()],
        vec![vec![z4.one()]],
        vec![1],
        vec![b.clone()],
    );
    assert!(p.is_err());
    let basis = InterpolationProblem::monomial_basis(&z4, 2).unwrap();
    assert!(InterpolationProblem::new(&z4, basis, vec![a; 3], vec![vec![z4.one()]], vec![1], vec![b]).is_ok());
}

#[test]
fn troi_zannier_examples() {
    let f5 = finite_field(5).unwrap();
    // every target is the whole field: f = t already works
    let all = "1:0,1,2,3,4;2:0,1,2,3,4;3:0,1,2,3,4;4:0,1,2,3,4";
    let tz = troi_zannier(&f5, &parse_targets(&f5, all).unwrap(), Budget::default()).unwrap();
    assert_eq!(tz.min_degree, 1);
    // only zero targets force t^5 - t
    let tz = troi_zannier(&f5, &parse_targets(&f5, "1:0;2:0;3:0;4:0").unwrap(), Budget::default()).unwrap();
    assert_eq!(tz.min_degree, 5);
    assert!(tz.criterion_holds());
    assert!(finite_field(6).is_err());
    assert!(troi_zannier(&make_chain_ring(2, 1, 2).unwrap(), &[], Budget::default()).is_err());
}

proptest! {
    #[test]
    fn interpolant_counts_agree(
        ring_i in 0usize..4,
        deg in 0u32..3,
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        let (p, ell, v) = [(2, 1, 2), (3, 1, 1), (2, 2, 1), (3, 1, 2)][ring_i];
        let r = make_chain_ring(p, ell, v).unwrap();
        let q = r.residue_size() as usize;
        let mut g = rng(seed);
        let all = r.elements().unwrap();
        let mut nodes: Vec<RingElement> = Vec::new();
        while nodes.len() < k.min(all.len()) {
            let x = all[g.gen_range(0..all.len())].clone();
            if !nodes.contains(&x) {
                nodes.push(x);
            }
        }
        let a: Vec<RingSubset> = (0..=deg).map(|_| {
            let size = g.gen_range(1..=q);
            random_f_set(&mut g, &r, size).unwrap()
        }).collect();
        let exps: Vec<u32> = nodes.iter().map(|_| g.gen_range(1..=v)).collect();
        let b: Vec<RingSubset> = nodes.iter().map(|_| {
            let size = g.gen_range(1..=q);
            random_f_set(&mut g, &r, size).unwrap()
        }).collect();
        let problem = InterpolationProblem::new(
            &r,
            InterpolationProblem::monomial_basis(&r, deg).unwrap(),
            a.clone(),
            nodes.iter().map(|x| vec![x.clone()]).collect(),
            exps.clone(),
            b.clone(),
        ).unwrap();
        let rep = interp_count(&problem, Budget::default()).unwrap();
        let oracle = univariate_oracle(&r, &a, &nodes, &exps, &b);
        prop_assert_eq!(&rep.direct, &BigUint::from(oracle));
        prop_assert_eq!(&rep.report.count, &rep.direct);
        prop_assert_eq!(count_interpolants_direct(&problem, Budget::default()).unwrap(), BigUint::from(oracle));
        prop_assert!(rep.report.holds);
    }

    #[test]
    fn nonzero_interpolants_found(seed in any::<u64>(), deg in 1u32..4, k in 1usize..4) {
        let r = finite_field(4).unwrap();
        let mut g = rng(seed);
        let all = r.elements().unwrap();
        let nodes: Vec<Vec<RingElement>> = all.iter().take(k).map(|x| vec![x.clone()]).collect();
        let zero_in = |g: &mut rand_chacha::ChaCha8Rng| {
            let extra: Vec<RingElement> = all[1..].iter().filter(|_| g.gen_bool(0.4)).cloned().collect();
            RingSubset::new(&r, [vec![r.zero()], extra].concat()).unwrap()
        };
        let coeffs: Vec<RingSubset> = (0..=deg).map(|_| zero_in(&mut g)).collect();
        let targets: Vec<RingSubset> = nodes.iter().map(|_| zero_in(&mut g)).collect();
        let problem = InterpolationProblem::new(
            &r,
            InterpolationProblem::monomial_basis(&r, deg).unwrap(),
            coeffs,
            nodes.clone(),
            vec![1; nodes.len()],
            targets,
        ).unwrap();
        let found = find_nonzero_interpolant(&problem, Budget::default()).unwrap();
        let count = count_interpolants_direct(&problem, Budget::default()).unwrap();
        prop_assert_eq!(found.is_some(), count > BigUint::from(1u32));
        if let Some(c) = found {
            prop_assert!(c.iter().any(|x| !x.is_zero()));
            let f: MPoly = problem.combine(&c).unwrap();
            prop_assert!(problem.satisfies(&f).unwrap());
        }
        if problem.bound_argument() > deg as i128 + 1 {
            prop_assert!(count > BigUint::from(1u32));
        }
    }

    #[test]
    fn troi_zannier_minimal_degree(q in prop::sample::select(vec![2u64, 3, 4, 5]), seed in any::<u64>()) {
        let field = finite_field(q).unwrap();
        let mut g = rng(seed);
        let all = field.elements().unwrap();
        let targets: Vec<(RingElement, RingSubset)> = all[1..]
            .iter()
            .map(|x| {
                let extra: Vec<RingElement> = all[1..].iter().filter(|_| g.gen_bool(0.3)).cloned().collect();
                (x.clone(), RingSubset::new(&field, [vec![field.zero()], extra].concat()).unwrap())
            })
            .collect();
        let tz = troi_zannier(&field, &targets, Budget::default()).unwrap();
        prop_assert_eq!(tz.min_degree, min_degree_oracle(&field, &targets));
        prop_assert!(tz.criterion_holds());
        prop_assert_eq!(tz.target_mass, targets.iter().map(|(_, b)| b.len() as u64).sum::<u64>());
        // the witness is a nonzero solution of the reported degree
        prop_assert_eq!(tz.witness.len() as u64, tz.min_degree + 1);
        prop_assert!(tz.witness[0].is_zero());
        prop_assert!(targets.iter().all(|(x, b)| b.contains(&horner(&field, &tz.witness, x))));
    }
}

//! Seeded random instances for sweeps. Every generator takes an explicit
//! `ChaCha8Rng`, so a seed reproduces the same instances on any platform.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chainring::{make_chain_ring, ChainRing, RingElement, RingSubset};
use crate::error::Result;
use crate::graphdiv::{Hypergraph, LoopConvention, MultiGraph};
use crate::mpoly::MPoly;
use crate::warning::RestrictedSystem;

pub use rand::SeedableRng;
pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape limits for random restricted systems.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemShape {
    /// Candidate rings as `(p, ell, v)`.
    pub rings: Vec<(u64, u32, u32)>,
    pub max_vars: usize,
    pub max_polys: usize,
    pub max_degree: u32,
}

impl Default for SystemShape {
    fn default() -> Self {
        SystemShape {
            rings: vec![(2, 1, 1), (2, 1, 2), (2, 2, 1), (2, 2, 2), (3, 1, 1), (3, 1, 2), (3, 2, 1), (3, 2, 2)],
            max_vars: 3,
            max_polys: 2,
            max_degree: 2,
        }
    }
}

/// `k` elements with distinct residues mod `p`, each lifted by a random
/// element of `pR`. Such a set satisfies Condition (F).
pub fn random_f_set(rng: &mut ChaCha8Rng, ring: &ChainRing, k: usize) -> Result<RingSubset> {
    let residues = ring.coset_representatives(1)?;
    let all = ring.elements()?;
    let p = ring.from_int(ring.p() as i128);
    let picks: Vec<&RingElement> = residues.choose_multiple(rng, k).collect();
    let els = picks
        .into_iter()
        .map(|r| {
            let lift = all.choose(rng).expect("nonempty ring");
            ring.add(r, &ring.mul(&p, lift)?)
        })
        .collect::<Result<Vec<_>>>()?;
    RingSubset::new(ring, els)
}

/// Sparse polynomial of total degree at most `max_degree`; each monomial is
/// present with probability one half and gets a uniform nonzero coefficient.
pub fn random_poly(rng: &mut ChaCha8Rng, ring: &ChainRing, nvars: usize, max_degree: u32) -> Result<MPoly> {
    let all = ring.elements()?;
    let mut terms = Vec::new();
    for e in monomials(nvars, max_degree) {
        if rng.gen_bool(0.5) {
            let c = all[rng.gen_range(1..all.len())].clone();
            terms.push((e, c));
        }
    }
    MPoly::from_terms(ring, nvars, terms)
}

/// All exponent vectors of total degree at most `d`.
pub fn monomials(nvars: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    let mut out = Vec::new();
    rec(0, d, &mut vec![0; nvars], &mut out);
    out
}

/// A random system within `shape`: `1..=max_vars` variables with input sets
/// of size `1..=q`, `0..=max_polys` polynomials with exponents in `[1, v]`
/// and output sets of size `1..=q`.
pub fn random_system(rng: &mut ChaCha8Rng, shape: &SystemShape) -> Result<RestrictedSystem> {
    let &(p, ell, v) = shape.rings.choose(rng).expect("at least one ring");
    let ring = make_chain_ring(p, ell, v)?;
    let q = ring.residue_size() as usize;
    let n = rng.gen_range(1..=shape.max_vars);
    let r = rng.gen_range(0..=shape.max_polys);
    let inputs = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=q);
            random_f_set(rng, &ring, k)
        })
        .collect::<Result<Vec<_>>>()?;
    let polys = (0..r).map(|_| random_poly(rng, &ring, n, shape.max_degree)).collect::<Result<Vec<_>>>()?;
    let exponents = (0..r).map(|_| rng.gen_range(1..=v)).collect();
    let outputs = (0..r)
        .map(|_| {
            let k = rng.gen_range(1..=q);
            random_f_set(rng, &ring, k)
        })
        .collect::<Result<Vec<_>>>()?;
    RestrictedSystem::new(&ring, inputs, polys, exponents, outputs)
}

/// `n` edges on `r` vertices, loops with probability `loop_rate`.
pub fn random_multigraph(rng: &mut ChaCha8Rng, r: usize, n: usize, loop_rate: f64) -> Result<MultiGraph> {
    let edges = (0..n)
        .map(|_| {
            let u = rng.gen_range(1..=r);
            if r == 1 || rng.gen_bool(loop_rate) {
                (u, u)
            } else {
                let mut v = rng.gen_range(1..r);
                if v >= u {
                    v += 1;
                }
                (u, v)
            }
        })
        .collect();
    Ok(MultiGraph::new(r, edges)?.with_convention(LoopConvention::Topologist))
}

/// `n` sets over a ground set of size `ground`, each element placed in at
/// most `d` sets.
pub fn random_hypergraph(rng: &mut ChaCha8Rng, n: usize, ground: usize, d: usize) -> Result<Hypergraph> {
    let mut sets = vec![Vec::new(); n];
    let idx: Vec<usize> = (0..n).collect();
    for x in 0..ground {
        let k = rng.gen_range(0..=d.min(n));
        for &i in idx.choose_multiple(rng, k) {
            sets[i].push(x);
        }
    }
    Hypergraph::new(sets)
}

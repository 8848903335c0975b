//! One parameter struct per experiment kind. Each struct doubles as the
//! subcommand's flags and as the `params` object of a JSON config; every
//! field is optional at the parsing layer and checked in `run`.

use clap::Args;
use num_bigint::BigUint;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use chainwarn::chainring::{make_chain_ring, ChainRing, RingElement, RingSubset};
use chainwarn::graphdiv::{
    atomic_edge_number, count_divisible_subgraphs, divisible_count_bound_holds, g_rq, hypergraph_count,
    incidence_sequence, schmitt_construction, script_e, search_atomic_graph, weighted_subgraph_report,
    DivisibilitySpec, Hypergraph, LoopConvention, MultiGraph,
};
use chainwarn::interp::{
    find_nonzero_interpolant, finite_field, interp_count, parse_targets, troi_zannier, InterpolationProblem,
};
use chainwarn::mbound::{m_bound_bruteforce, m_bound_with_witness, pigeonhole_threshold, MBoundQuery};
use chainwarn::mpoly::MPoly;
use chainwarn::warning::{
    afk_valuation, count_fat_target_nonvanishing, count_nonvanishing, sharp_alon_furedi_instance, verify_main_theorem,
    RestrictedSystem, VerificationReport,
};
use chainwarn::zerosum::{
    count_weighted_sums, davenport, egz_count, fat_davenport, little_d, verify_fat_bound, weighted_davenport,
    AbelianGroup, GSequence, GroupElement, Target, WeightScheme,
};
use chainwarn::Budget;

use crate::values::{ElemSets, Elems, IntList, IntSets, TextList};
use crate::CliError;

/// Settings shared by every kind.
#[derive(Clone, Copy, Debug)]
pub struct Ctx {
    pub budget: Budget,
    pub seed: u64,
    pub workers: usize,
}

/// Result payload plus the conjunction of its `holds` flags (`None` for
/// kinds that compute a value without checking a bound).
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub result: Value,
    pub holds: Option<bool>,
}

impl Outcome {
    fn value(result: Value) -> Self {
        Outcome { result, holds: None }
    }
    fn checked(result: Value, holds: bool) -> Self {
        Outcome { result, holds: Some(holds) }
    }
}

pub trait Kind: Serialize + DeserializeOwned {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError>;
}

pub const KINDS: &[&str] = &[
    "mbound",
    "verify-main",
    "alon-furedi",
    "afk-lemma",
    "davenport",
    "fat-davenport",
    "nweighted",
    "egz",
    "hypergraph",
    "schmitt",
    "divisible",
    "atomic-search",
    "script-e",
    "interp",
    "troi-zannier",
    "sweep",
];

/// Deserializes `params` for `kind`, runs it and returns the canonical
/// parameter echo with the outcome.
pub fn execute(kind: &str, params: Value, ctx: &Ctx) -> Result<(Value, Outcome), CliError> {
    fn go<K: Kind>(params: Value, ctx: &Ctx) -> Result<(Value, Outcome), CliError> {
        let args: K = serde_json::from_value(params).map_err(|e| CliError::BadParams(e.to_string()))?;
        let echo = strip_nulls(serde_json::to_value(&args).expect("params serialize"));
        let out = args.run(ctx)?;
        Ok((echo, out))
    }
    match kind {
        "mbound" => go::<MboundArgs>(params, ctx),
        "verify-main" => go::<VerifyMainArgs>(params, ctx),
        "alon-furedi" => go::<AlonFurediArgs>(params, ctx),
        "afk-lemma" => go::<AfkLemmaArgs>(params, ctx),
        "davenport" => go::<DavenportArgs>(params, ctx),
        "fat-davenport" => go::<FatDavenportArgs>(params, ctx),
        "nweighted" => go::<NweightedArgs>(params, ctx),
        "egz" => go::<EgzArgs>(params, ctx),
        "hypergraph" => go::<HypergraphArgs>(params, ctx),
        "schmitt" => go::<SchmittArgs>(params, ctx),
        "divisible" => go::<DivisibleArgs>(params, ctx),
        "atomic-search" => go::<AtomicSearchArgs>(params, ctx),
        "script-e" => go::<ScriptEArgs>(params, ctx),
        "interp" => go::<InterpArgs>(params, ctx),
        "troi-zannier" => go::<TroiZannierArgs>(params, ctx),
        "sweep" => go::<crate::sweep::SweepArgs>(params, ctx),
        other => Err(CliError::BadKind(format!("unknown kind `{other}`"))),
    }
}

/// Drops `null` members (unset options) recursively from objects.
pub fn strip_nulls(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            Value::Object(m.into_iter().filter(|(_, x)| !x.is_null()).map(|(k, x)| (k, strip_nulls(x))).collect())
        }
        other => other,
    }
}

fn need<T: Clone>(x: &Option<T>, name: &str) -> Result<T, CliError> {
    x.clone().ok_or_else(|| CliError::BadParams(format!("missing parameter `{name}`")))
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::BadParams(msg.into())
}

/// Integers as JSON numbers while they fit, decimal strings beyond.
pub fn big(n: &BigUint) -> Value {
    u64::try_from(n).map(Value::from).unwrap_or_else(|_| Value::from(n.to_string()))
}

fn report_json(r: &VerificationReport) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("count".into(), big(&r.count));
    m.insert("bound".into(), big(&r.bound));
    m.insert("bound_argument".into(), Value::from(r.bound_argument as i64));
    m.insert("vacuous".into(), Value::from(r.vacuous));
    m.insert("holds".into(), Value::from(r.holds));
    m
}

fn to_u64(xs: &[i64], what: &str) -> Result<Vec<u64>, CliError> {
    xs.iter().map(|&x| u64::try_from(x).map_err(|_| bad(format!("{what} must be nonnegative, got {x}")))).collect()
}

fn ring_of(p: Option<u64>, ell: Option<u32>, v: Option<u32>) -> Result<ChainRing, CliError> {
    Ok(make_chain_ring(need(&p, "p")?, ell.unwrap_or(1), v.unwrap_or(1))?)
}

fn elements(ring: &ChainRing, xs: &Elems) -> Result<Vec<RingElement>, CliError> {
    xs.0.iter().map(|x| ring.parse_element(x).map_err(CliError::from)).collect()
}

fn subset(ring: &ChainRing, xs: &Elems) -> Result<RingSubset, CliError> {
    Ok(RingSubset::new(ring, elements(ring, xs)?)?)
}

fn subsets(ring: &ChainRing, xs: &ElemSets) -> Result<Vec<RingSubset>, CliError> {
    xs.0.iter().map(|s| subset(ring, s)).collect()
}

fn polys(ring: &ChainRing, nvars: usize, texts: &[String]) -> Result<Vec<MPoly>, CliError> {
    texts.iter().map(|t| MPoly::parse(ring, nvars, t).map_err(CliError::from)).collect()
}

fn exps(xs: &IntList) -> Result<Vec<u32>, CliError> {
    xs.0.iter().map(|&x| u32::try_from(x).map_err(|_| bad(format!("bad exponent {x}")))).collect()
}

fn group_of(invariants: &IntList) -> Result<AbelianGroup, CliError> {
    let inv = to_u64(&invariants.0, "invariant factors")?;
    let inv: Vec<u64> = inv.into_iter().skip_while(|&n| n == 1).collect();
    if inv.is_empty() {
        Ok(AbelianGroup::trivial())
    } else {
        Ok(AbelianGroup::new(inv)?)
    }
}

/// Group elements from `;`-separated coordinate lists. In a cyclic group a
/// single `,`-list is read as several elements.
fn group_elements(g: &AbelianGroup, xs: &IntSets) -> Result<Vec<GroupElement>, CliError> {
    let items: Vec<Vec<i64>> = if g.rank() == 1 && xs.0.len() == 1 && xs.0[0].len() > 1 {
        xs.0[0].iter().map(|&x| vec![x]).collect()
    } else {
        xs.0.clone()
    };
    items.iter().map(|x| g.reduce(x).map_err(CliError::from)).collect()
}

/// One weight set per term; a single set applies to every term.
fn weight_sets(a: &IntSets, n: usize) -> Result<Vec<Vec<i64>>, CliError> {
    match a.0.len() {
        1 => Ok(vec![a.0[0].clone(); n]),
        k if k == n => Ok(a.0.clone()),
        k => Err(bad(format!("{k} weight sets for {n} terms"))),
    }
}

fn texts<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(ToString::to_string).collect()
}

// ---------------------------------------------------------------------------

/// Exhaustive cross-check of the m-bound stops at this many vectors.
const ORACLE_LIMIT: u128 = 1_000_000;

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct MboundArgs {
    /// Sizes a_1..a_n, e.g. 2,2,2.
    #[arg(long)]
    pub a: Option<IntList>,
    /// Target sum N.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<i64>,
}

impl Kind for MboundArgs {
    fn run(&self, _: &Ctx) -> Result<Outcome, CliError> {
        let a = to_u64(&need(&self.a, "a")?.0, "a")?;
        let q = MBoundQuery::new(a.clone(), need(&self.n, "N")? as i128)?;
        let (value, witness) = m_bound_with_witness(&q);
        let mut out = json!({
            "value": big(&value),
            "witness": witness,
            "pigeonhole": pigeonhole_threshold(&q),
        });
        let grid: u128 = a.iter().map(|&x| x as u128).product();
        if grid <= ORACLE_LIMIT {
            let brute = m_bound_bruteforce(&q)?;
            out["oracle"] = big(&brute);
            return Ok(Outcome::checked(out, brute == value));
        }
        Ok(Outcome::value(out))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyMainArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub v: Option<u32>,
    /// Input sets, e.g. "0,1;0,1".
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<ElemSets>,
    /// Polynomials in t1..tn, `;`-separated.
    #[arg(long)]
    pub polys: Option<TextList>,
    /// Exponents v_j.
    #[arg(long)]
    pub vj: Option<IntList>,
    /// Output sets B_j.
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<ElemSets>,
}

impl VerifyMainArgs {
    pub fn system(&self) -> Result<RestrictedSystem, CliError> {
        let ring = ring_of(self.p, self.ell, self.v)?;
        let inputs = subsets(&ring, &need(&self.a, "A")?)?;
        let fs = polys(&ring, inputs.len(), &self.polys.clone().unwrap_or_default().0)?;
        let vj = match &self.vj {
            Some(v) => exps(v)?,
            None => vec![1; fs.len()],
        };
        let outputs = subsets(&ring, &self.b.clone().unwrap_or_default())?;
        Ok(RestrictedSystem::new(&ring, inputs, fs, vj, outputs)?)
    }

    /// The flag form of a system, so sweeps can emit reproduction configs.
    pub fn from_system(sys: &RestrictedSystem) -> Self {
        let ring = sys.ring();
        VerifyMainArgs {
            p: Some(ring.p()),
            ell: Some(ring.ell()),
            v: Some(ring.length()),
            a: Some(ElemSets(sys.inputs().iter().map(|s| Elems(texts(s.elements()))).collect())),
            polys: Some(TextList(texts(sys.polys()))),
            vj: Some(IntList(sys.exponents().iter().map(|&x| x as i64).collect())),
            b: Some(ElemSets(sys.outputs().iter().map(|s| Elems(texts(s.elements()))).collect())),
        }
    }
}

impl Kind for VerifyMainArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let sys = self.system()?;
        let rep = verify_main_theorem(&sys, ctx.budget)?;
        let fat = count_fat_target_nonvanishing(&sys, ctx.budget)?;
        if fat != rep.count {
            return Err(CliError::Internal(format!(
                "fat-target polynomial is nonzero at {fat} points but there are {} solutions",
                rep.count
            )));
        }
        let mut m = report_json(&rep);
        m.insert("degree_cost".into(), Value::from(sys.degree_cost() as u64));
        m.insert("fat_target_count".into(), big(&fat));
        Ok(Outcome::checked(Value::Object(m), rep.holds))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AlonFurediArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub v: Option<u32>,
    /// Grid sets A_i.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<ElemSets>,
    /// The polynomial; alternatively give `y` for the sharp instance.
    #[arg(long)]
    pub poly: Option<String>,
    /// Build the product polynomial nonvanishing on exactly prod y_i points.
    #[arg(long)]
    pub y: Option<IntList>,
}

impl Kind for AlonFurediArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let ring = ring_of(self.p, self.ell, self.v)?;
        let grid = subsets(&ring, &need(&self.a, "A")?)?;
        let (f, expected) = match (&self.poly, &self.y) {
            (Some(text), None) => (MPoly::parse(&ring, grid.len(), text)?, None),
            (None, Some(y)) => {
                let y = to_u64(&y.0, "y")?;
                let target: BigUint = y.iter().map(|&k| BigUint::from(k)).product();
                (sharp_alon_furedi_instance(&ring, &grid, &y)?, Some(target))
            }
            _ => return Err(bad("give exactly one of `poly` and `y`")),
        };
        let rep = count_nonvanishing(&f, &grid, ctx.budget)?;
        let mut m = report_json(&rep);
        m.insert("degree".into(), json!(f.total_degree()));
        let mut holds = rep.holds;
        if let Some(t) = expected {
            m.insert("polynomial".into(), Value::from(f.to_string()));
            m.insert("expected".into(), big(&t));
            m.insert("exact".into(), Value::from(rep.count == t));
            holds &= rep.count == t;
        }
        Ok(Outcome::checked(Value::Object(m), holds))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AfkLemmaArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub v: Option<u32>,
    #[arg(long)]
    pub vj: Option<u32>,
    /// The set T, pairwise incongruent mod p.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t: Option<Elems>,
    /// A single point; every ring element when omitted.
    #[arg(long)]
    pub x: Option<String>,
}

impl Kind for AfkLemmaArgs {
    fn run(&self, _: &Ctx) -> Result<Outcome, CliError> {
        let ring = ring_of(self.p, self.ell, self.v)?;
        let vj = self.vj.unwrap_or(ring.length());
        let t = subset(&ring, &self.t.clone().unwrap_or_default())?;
        let xs = match &self.x {
            Some(x) => vec![ring.parse_element(x)?],
            None => ring.elements()?,
        };
        let mut failures = Vec::new();
        let mut equality = 0u64;
        let mut first = None;
        for x in &xs {
            let o = afk_valuation(&ring, x, vj, &t)?;
            equality += o.equality_case as u64;
            if !o.lemma_holds() {
                failures.push(json!({"x": x.to_string(), "valuation": o.valuation, "equality_case": o.equality_case}));
            }
            first.get_or_insert(o);
        }
        let o = first.ok_or_else(|| bad("no points"))?;
        let mut out = json!({
            "c": o.c,
            "points": xs.len(),
            "equality_cases": equality,
            "failures": failures,
            "holds": failures.is_empty(),
        });
        if self.x.is_some() {
            out["valuation"] = Value::from(o.valuation);
            out["equality_case"] = Value::from(o.equality_case);
        }
        let holds = failures.is_empty();
        Ok(Outcome::checked(out, holds))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DavenportArgs {
    /// Invariant factors, e.g. 2,2,4.
    #[arg(long)]
    pub group: Option<IntList>,
    /// Weight set; the weighted constant D_A is computed when present.
    #[arg(long = "A", allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub a: Option<IntList>,
}

impl Kind for DavenportArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let g = group_of(&need(&self.group, "group")?)?;
        let base = json!({"group": g.to_string(), "order": g.order(), "d": little_d(&g)});
        let mut out = base;
        match &self.a {
            None => out["D"] = Value::from(davenport(&g, ctx.budget)?),
            Some(a) => out["D_A"] = Value::from(weighted_davenport(&g, &a.0, ctx.budget)?),
        }
        Ok(Outcome::value(out))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct FatDavenportArgs {
    #[arg(long)]
    pub group: Option<IntList>,
    #[arg(long = "A", allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub a: Option<IntList>,
    /// Target elements, `;`-separated coordinate lists.
    #[arg(long = "B", allow_hyphen_values = true)]
    #[serde(rename = "B")]
    pub b: Option<IntSets>,
}

impl Kind for FatDavenportArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let g = group_of(&need(&self.group, "group")?)?;
        let a = need(&self.a, "A")?.0;
        let b = group_elements(&g, &need(&self.b, "B")?)?;
        let d = fat_davenport(&g, &a, &b, ctx.budget)?;
        Ok(Outcome::value(json!({"group": g.to_string(), "D": d})))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct NweightedArgs {
    #[arg(long)]
    pub group: Option<IntList>,
    /// The sequence, e.g. "1,0;0,1".
    #[arg(long)]
    pub seq: Option<IntSets>,
    /// One weight set for every term, or one per term.
    #[arg(long = "A", allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub a: Option<IntSets>,
    /// Per-coordinate targets B_1;..;B_r.
    #[arg(long = "B", allow_hyphen_values = true)]
    #[serde(rename = "B")]
    pub b: Option<IntSets>,
}

fn weighted_instance(
    group: &Option<IntList>,
    seq: &Option<IntSets>,
    a: &Option<IntSets>,
    b: &Option<IntSets>,
) -> Result<(GSequence, WeightScheme), CliError> {
    let g = group_of(&need(group, "group")?)?;
    let s = GSequence::new(&g, &need(seq, "seq")?.0)?;
    let weights = weight_sets(&a.clone().unwrap_or(IntSets(vec![vec![0, 1]])), s.len())?;
    let b = need(b, "B")?.0;
    Ok((s, WeightScheme::new(weights, Target::Product(b))))
}

impl Kind for NweightedArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let (s, w) = weighted_instance(&self.group, &self.seq, &self.a, &self.b)?;
        let direct = count_weighted_sums(&s, &w, false, ctx.budget)?;
        let rep = verify_fat_bound(&s, &w, ctx.budget)?;
        if direct != rep.count {
            return Err(CliError::Internal(format!("direct count {direct} vs reduction {}", rep.count)));
        }
        let mut m = report_json(&rep);
        m.insert("direct_count".into(), big(&direct));
        Ok(Outcome::checked(Value::Object(m), rep.holds))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct EgzArgs {
    #[arg(long)]
    pub group: Option<IntList>,
    #[arg(long)]
    pub seq: Option<IntSets>,
    #[arg(long = "A", allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub a: Option<IntSets>,
    #[arg(long = "B", allow_hyphen_values = true)]
    #[serde(rename = "B")]
    pub b: Option<IntSets>,
    /// Support sizes must be divisible by p^k.
    #[arg(long)]
    pub k: Option<u32>,
}

impl Kind for EgzArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let (s, w) = weighted_instance(&self.group, &self.seq, &self.a, &self.b)?;
        let rep = egz_count(&s, &w, need(&self.k, "k")?, ctx.budget)?;
        Ok(Outcome::checked(Value::Object(report_json(&rep)), rep.holds))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct HypergraphArgs {
    /// The sets, e.g. "1;2;3" or "0,1;1,2".
    #[arg(long)]
    pub sets: Option<IntSets>,
    #[arg(long)]
    pub m: Option<u64>,
    /// Residues mod m.
    #[arg(long = "B", allow_hyphen_values = true)]
    #[serde(rename = "B")]
    pub b: Option<IntList>,
}

fn hypergraph_payload(h: &Hypergraph, m: u64, b: &[i64], budget: Budget) -> Result<Outcome, CliError> {
    let c = hypergraph_count(h, m, b, budget)?;
    let mut out = json!({
        "length": h.len(),
        "max_degree": h.max_degree(),
        "count": big(&c.count),
        "nonempty": big(&c.nonempty),
        "polynomial_count": c.polynomial_count.as_ref().map(big),
        "nonempty_forced": c.nonempty_forced,
        "holds": c.holds(),
    });
    if let Some(r) = &c.report {
        out["bound"] = big(&r.bound);
        out["bound_argument"] = Value::from(r.bound_argument as i64);
    }
    Ok(Outcome::checked(out, c.holds()))
}

impl Kind for HypergraphArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let sets = need(&self.sets, "sets")?.0;
        let sets = sets.iter().map(|s| to_u64(s, "ground elements")).collect::<Result<Vec<_>, _>>()?;
        let h = Hypergraph::new(sets.into_iter().map(|s| s.into_iter().map(|x| x as usize).collect()).collect())?;
        hypergraph_payload(&h, need(&self.m, "m")?, &need(&self.b, "B")?.0, ctx.budget)
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SchmittArgs {
    #[arg(long)]
    pub b: Option<u64>,
    #[arg(long)]
    pub d: Option<u64>,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub a: Option<u64>,
}

impl Kind for SchmittArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let (b, d, m) = (need(&self.b, "b")?, need(&self.d, "d")?, need(&self.m, "m")?);
        let (h, bset) = schmitt_construction(b, d, m, self.a.unwrap_or(1))?;
        let c = hypergraph_count(&h, m, &bset, ctx.budget)?;
        let atomic = c.nonempty == BigUint::ZERO;
        let length_ok = h.len() as u64 == d * (m - b);
        let out = json!({
            "sets": h.to_string(),
            "B": bset,
            "length": h.len(),
            "max_degree": h.max_degree(),
            "nonempty": big(&c.nonempty),
            "atomic": atomic,
            "holds": atomic && length_ok,
        });
        Ok(Outcome::checked(out, atomic && length_ok))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DivisibleArgs {
    /// Edges as "u-v" pairs, e.g. "1-2,2-3"; loops as "u-u".
    #[arg(long)]
    pub graph: Option<String>,
    /// Vertex count (defaults to the largest vertex named).
    #[arg(long)]
    pub r: Option<usize>,
    /// One modulus for every vertex, or q_1..q_r.
    #[arg(long)]
    pub q: Option<IntList>,
    /// Degree type g (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<IntList>,
    /// "topologist" (a loop adds 2) or "algebraist" (a loop adds 1).
    #[arg(long)]
    pub loops: Option<String>,
    /// Edge weight sets, one for all edges or one per edge.
    #[arg(long = "A", allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub a: Option<IntSets>,
    /// Per-vertex target sets for weighted degrees.
    #[arg(long = "B", allow_hyphen_values = true)]
    #[serde(rename = "B")]
    pub b: Option<IntSets>,
}

/// Largest group for which the subgraph-count bound computes `D`.
const BOUND_GROUP_LIMIT: u64 = 32;

impl Kind for DivisibleArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let mut gr = MultiGraph::parse(&need(&self.graph, "graph")?, self.r)?;
        match self.loops.as_deref() {
            None | Some("topologist") => {}
            Some("algebraist") => gr = gr.with_convention(LoopConvention::Algebraist),
            Some(other) => return Err(bad(format!("unknown loop convention {other:?}"))),
        }
        let r = gr.vertices();
        let q = to_u64(&need(&self.q, "q")?.0, "q")?;
        let mut spec = match q.as_slice() {
            [one] => DivisibilitySpec::uniform(r, *one)?,
            _ => DivisibilitySpec::new(q)?,
        };
        if let Some(g) = &self.g {
            spec = spec.with_type(&g.0)?;
        }
        let weighted = self.a.is_some() || self.b.is_some();
        if let Some(a) = &self.a {
            spec = spec.with_weights(weight_sets(a, gr.num_edges())?);
        }
        if let Some(b) = &self.b {
            spec = spec.with_targets(b.0.clone())?;
        }
        let c = count_divisible_subgraphs(&gr, &spec, ctx.budget)?;
        let mut out = json!({
            "graph": gr.to_string(),
            "edges": gr.num_edges(),
            "count": big(&c.direct),
            "via_sequence": big(&c.via_sequence),
            "via_parity": c.via_parity.as_ref().map(big),
        });
        let mut holds = None;
        if weighted {
            if self.b.is_some() {
                let rep = weighted_subgraph_report(&gr, &spec, &c.direct)?;
                out["bound"] = big(&rep.bound);
                out["bound_argument"] = Value::from(rep.bound_argument as i64);
                out["holds"] = Value::from(rep.holds);
                holds = Some(rep.holds);
            }
        } else if spec.g().iter().all(|&x| x == 0) && gr.convention() == LoopConvention::Topologist {
            out["nonempty"] = big(&c.nonempty());
            let inc = incidence_sequence(&gr, &spec)?;
            let group = inc.effective_group();
            out["group"] = Value::from(group.to_string());
            if group.order() <= BOUND_GROUP_LIMIT {
                let d = davenport(group, ctx.budget)?;
                let ok = divisible_count_bound_holds(&c.direct, gr.num_edges(), d);
                out["D"] = Value::from(d);
                out["holds"] = Value::from(ok);
                holds = Some(ok);
            }
        }
        Ok(Outcome { result: out, holds })
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct AtomicSearchArgs {
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub q: Option<u64>,
    /// Edge count; without it the least n with no atomic graph is searched.
    #[arg(long)]
    pub n: Option<usize>,
}

impl Kind for AtomicSearchArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let (r, q) = (need(&self.r, "r")?, need(&self.q, "q")?);
        if let Some(n) = self.n {
            let found = search_atomic_graph(r, q, n, ctx.budget)?;
            return Ok(Outcome::value(json!({
                "atomic": found.is_some(),
                "graph": found.map(|g| g.to_string()),
            })));
        }
        let e = atomic_edge_number(r, q, ctx.budget)?;
        let mut out = json!({"E": e});
        if r >= 3 {
            out["script_E"] = Value::from(script_e(r as u64, q)?);
        }
        Ok(Outcome::value(out))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScriptEArgs {
    #[arg(long)]
    pub r: Option<u64>,
    #[arg(long)]
    pub q: Option<u64>,
}

impl Kind for ScriptEArgs {
    fn run(&self, _: &Ctx) -> Result<Outcome, CliError> {
        let (r, q) = (need(&self.r, "r")?, need(&self.q, "q")?);
        let e = script_e(r, q)?;
        let g = g_rq(r, q)?;
        let d = little_d(&g);
        Ok(Outcome::checked(json!({"E": e, "group": g.to_string(), "d": d, "holds": d == e}), d == e))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct InterpArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub ell: Option<u32>,
    #[arg(long)]
    pub v: Option<u32>,
    /// Basis polynomials; defaults to 1, t, .., t^degree.
    #[arg(long)]
    pub basis: Option<TextList>,
    #[arg(long)]
    pub degree: Option<u32>,
    /// Variable count of the basis (default 1).
    #[arg(long)]
    pub nvars: Option<usize>,
    /// Coefficient sets, one for all or one per basis element.
    #[arg(long = "A")]
    #[serde(rename = "A")]
    pub a: Option<ElemSets>,
    /// Nodes, each a `,`-list of coordinates, `;`-separated.
    #[arg(long)]
    pub nodes: Option<ElemSets>,
    #[arg(long)]
    pub vj: Option<IntList>,
    /// Target sets, one per node.
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<ElemSets>,
    /// Also search for a nonzero interpolant (needs 0 in every set).
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub find: bool,
}

impl Kind for InterpArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let ring = ring_of(self.p, self.ell, self.v)?;
        let nvars = self.nvars.unwrap_or(1);
        let basis = match (&self.basis, self.degree) {
            (Some(b), None) => polys(&ring, nvars, &b.0)?,
            (None, Some(d)) if nvars == 1 => InterpolationProblem::monomial_basis(&ring, d)?,
            _ => return Err(bad("give exactly one of `basis` and `degree` (the latter for one variable)")),
        };
        let a = need(&self.a, "A")?;
        let coeff_sets = match a.0.len() {
            1 => vec![subset(&ring, &a.0[0])?; basis.len()],
            _ => subsets(&ring, &a)?,
        };
        let nodes: Vec<Vec<RingElement>> =
            need(&self.nodes, "nodes")?.0.iter().map(|x| elements(&ring, x)).collect::<Result<_, _>>()?;
        let vj = match &self.vj {
            Some(v) => exps(v)?,
            None => vec![1; nodes.len()],
        };
        let targets = subsets(&ring, &need(&self.b, "B")?)?;
        let p = InterpolationProblem::new(&ring, basis, coeff_sets, nodes, vj, targets)?;
        let rep = interp_count(&p, ctx.budget)?;
        let mut m = report_json(&rep.report);
        m.insert("direct_count".into(), big(&rep.direct));
        if self.find {
            let f = find_nonzero_interpolant(&p, ctx.budget)?;
            m.insert("interpolant".into(), json!(f.map(|c| texts(&c))));
        }
        Ok(Outcome::checked(Value::Object(m), rep.report.holds))
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct TroiZannierArgs {
    #[arg(long)]
    pub q: Option<u64>,
    /// Targets per nonzero node, e.g. "1:0,1;2:0".
    #[arg(long = "B")]
    #[serde(rename = "B")]
    pub b: Option<String>,
}

impl Kind for TroiZannierArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let field = finite_field(need(&self.q, "q")?)?;
        let targets = parse_targets(&field, &need(&self.b, "B")?)?;
        let tz = troi_zannier(&field, &targets, ctx.budget)?;
        let out = json!({
            "target_mass": tz.target_mass,
            "displayed_bound": tz.displayed_bound.to_string(),
            "displayed_bound_holds": tz.displayed_bound_holds(),
            "criterion_degree": tz.criterion_degree,
            "min_degree": tz.min_degree,
            "witness": texts(&tz.witness),
            "holds": tz.criterion_holds(),
        });
        Ok(Outcome::checked(out, tz.criterion_holds()))
    }
}

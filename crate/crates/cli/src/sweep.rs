//! Sweeps: run one kind over a product of parameter values or over seeded
//! random instances, in parallel, and aggregate the outcomes in instance
//! order.

use std::collections::BTreeMap;
use std::str::FromStr;

use clap::Args;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use chainwarn::sampling::{random_hypergraph, random_multigraph, random_system, rng, SystemShape};

use crate::kinds::{execute, strip_nulls, Ctx, Kind, Outcome, VerifyMainArgs, KINDS};
use crate::values::IntSets;
use crate::CliError;

/// A JSON value given inline on the command line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Json(pub Value);

impl FromStr for Json {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        serde_json::from_str(s).map(Json).map_err(|e| e.to_string())
    }
}

#[derive(Args, Serialize, Deserialize, Clone, Debug, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    /// The kind run for every instance.
    #[arg(long)]
    pub kind: Option<String>,
    /// Parameters shared by every instance (a JSON object).
    #[arg(long)]
    pub base: Option<Json>,
    /// Parameter name to values: a JSON list, `{"range": [lo, hi]}` or
    /// `{"vectors": {"max_len": L, "max": M}}`. The sweep runs the product.
    #[arg(long)]
    pub grid: Option<Json>,
    /// Seeded random instances, e.g. `{"count": 1000}` plus shape limits.
    #[arg(long)]
    pub random: Option<Json>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::BadParams(msg.into())
}

/// Expands one grid entry into its list of values.
fn expand(name: &str, spec: &Value) -> Result<Vec<Value>, CliError> {
    match spec {
        Value::Array(xs) => Ok(xs.clone()),
        Value::Object(m) if m.len() == 1 && m.contains_key("range") => {
            let r: (i64, i64) = serde_json::from_value(m["range"].clone())
                .map_err(|e| bad(format!("grid `{name}`: range must be [lo, hi]: {e}")))?;
            Ok((r.0..=r.1).map(Value::from).collect())
        }
        Value::Object(m) if m.len() == 1 && m.contains_key("vectors") => {
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Vectors {
                max_len: usize,
                max: i64,
                #[serde(default = "one")]
                min: i64,
                #[serde(default = "one_usize")]
                min_len: usize,
            }
            fn one() -> i64 {
                1
            }
            fn one_usize() -> usize {
                1
            }
            let v: Vectors = serde_json::from_value(m["vectors"].clone())
                .map_err(|e| bad(format!("grid `{name}`: vectors: {e}")))?;
            let mut out = Vec::new();
            let mut layer: Vec<Vec<i64>> = vec![vec![]];
            for len in 1..=v.max_len {
                layer = layer
                    .into_iter()
                    .flat_map(|p| (v.min..=v.max).map(move |x| [p.clone(), vec![x]].concat()))
                    .collect();
                if len >= v.min_len {
                    out.extend(layer.iter().map(|x| Value::from(x.clone())));
                }
            }
            Ok(out)
        }
        _ => Err(bad(format!("grid `{name}` must be a list, a range or a vectors spec"))),
    }
}

fn grid_instances(base: &Map<String, Value>, grid: &Map<String, Value>) -> Result<Vec<Value>, CliError> {
    let axes: Vec<(String, Vec<Value>)> =
        grid.iter().map(|(k, spec)| Ok((k.clone(), expand(k, spec)?))).collect::<Result<_, CliError>>()?;
    let mut out = vec![base.clone()];
    for (k, values) in &axes {
        out = out
            .into_iter()
            .flat_map(|m| {
                values.iter().map(move |x| {
                    let mut m = m.clone();
                    m.insert(k.clone(), x.clone());
                    m
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(Value::Object).collect())
}

fn get<T: serde::de::DeserializeOwned>(m: &Map<String, Value>, key: &str, default: T) -> Result<T, CliError> {
    match m.get(key) {
        None => Ok(default),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| bad(format!("random.{key}: {e}"))),
    }
}

const RANDOM_KEYS: &[&str] = &[
    "count",
    "rings",
    "max_vars",
    "max_polys",
    "max_degree",
    "max_r",
    "max_n",
    "q",
    "loop_rate",
    "max_ground",
    "max_d",
    "m",
];

fn random_instances(kind: &str, spec: &Map<String, Value>, seed: u64) -> Result<Vec<Value>, CliError> {
    if let Some(k) = spec.keys().find(|k| !RANDOM_KEYS.contains(&k.as_str())) {
        return Err(bad(format!("unknown random-sweep setting `{k}`")));
    }
    let count: usize = get(spec, "count", 100)?;
    let mut g = rng(seed);
    let mut out = Vec::with_capacity(count);
    match kind {
        "verify-main" => {
            let d = SystemShape::default();
            let shape = SystemShape {
                rings: get(spec, "rings", d.rings)?,
                max_vars: get(spec, "max_vars", d.max_vars)?,
                max_polys: get(spec, "max_polys", d.max_polys)?,
                max_degree: get(spec, "max_degree", d.max_degree)?,
            };
            if shape.rings.is_empty() || shape.max_vars == 0 {
                return Err(bad("random systems need at least one ring and one variable"));
            }
            for _ in 0..count {
                let sys = random_system(&mut g, &shape)?;
                out.push(serde_json::to_value(VerifyMainArgs::from_system(&sys)).expect("serializable"));
            }
        }
        "divisible" => {
            let max_r: usize = get(spec, "max_r", 4)?;
            let max_n: usize = get(spec, "max_n", 10)?;
            let qs: Vec<u64> = get(spec, "q", vec![2, 3])?;
            let loop_rate: f64 = get(spec, "loop_rate", 0.1)?;
            if max_r == 0 || qs.is_empty() || !(0.0..=1.0).contains(&loop_rate) {
                return Err(bad("divisible sweeps need max_r >= 1, some q and loop_rate in [0, 1]"));
            }
            for _ in 0..count {
                let r = g.gen_range(1..=max_r);
                let n = g.gen_range(0..=max_n);
                let q = *qs.choose(&mut g).expect("nonempty");
                let gr = random_multigraph(&mut g, r, n, loop_rate)?;
                out.push(json!({"graph": gr.to_string(), "r": r, "q": [q]}));
            }
        }
        "hypergraph" => {
            let max_n: usize = get(spec, "max_n", 12)?;
            let max_ground: usize = get(spec, "max_ground", 10)?;
            let max_d: usize = get(spec, "max_d", 3)?;
            let ms: Vec<u64> = get(spec, "m", vec![2, 3, 4])?;
            if max_n == 0 || max_ground == 0 || max_d == 0 || ms.is_empty() {
                return Err(bad("hypergraph sweeps need positive limits and some m"));
            }
            for _ in 0..count {
                let n = g.gen_range(1..=max_n);
                let ground = g.gen_range(1..=max_ground);
                let d = g.gen_range(1..=max_d);
                let m = *ms.choose(&mut g).expect("nonempty");
                let h = random_hypergraph(&mut g, n, ground, d)?;
                // B: 0 plus residues that stay incongruent mod the least prime factor
                let p = (2..=m).find(|k| m.is_multiple_of(*k)).unwrap_or(m) as i64;
                let mut b = vec![0i64];
                for x in 1..m as i64 {
                    if b.iter().all(|y| (x - y) % p != 0) && g.gen_bool(0.5) {
                        b.push(x);
                    }
                }
                let sets = IntSets(h.sets().iter().map(|s| s.iter().map(|&x| x as i64).collect()).collect());
                out.push(json!({"sets": sets, "m": m, "B": b}));
            }
        }
        other => return Err(bad(format!("no random generator for kind `{other}`"))),
    }
    Ok(out)
}

#[derive(Serialize)]
struct InstanceRecord {
    index: usize,
    status: &'static str,
    holds: Option<bool>,
    params: Value,
    budget_used: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl Kind for SweepArgs {
    fn run(&self, ctx: &Ctx) -> Result<Outcome, CliError> {
        let kind = self.kind.clone().ok_or_else(|| bad("missing parameter `kind`"))?;
        if kind == "sweep" {
            return Err(bad("sweeps do not nest"));
        }
        if !KINDS.contains(&kind.as_str()) {
            return Err(CliError::BadKind(format!("unknown kind `{kind}`")));
        }
        let base = match &self.base {
            None => Map::new(),
            Some(Json(Value::Object(m))) => m.clone(),
            Some(_) => return Err(bad("`base` must be an object")),
        };
        let grid = match &self.grid {
            None => None,
            Some(Json(Value::Object(m))) => Some(m.clone()),
            Some(_) => return Err(bad("`grid` must be an object")),
        };
        let instances = match (&grid, &self.random) {
            (Some(_), Some(_)) => return Err(bad("give `grid` or `random`, not both")),
            (Some(gr), None) => grid_instances(&base, gr)?,
            (None, Some(Json(Value::Object(spec)))) => random_instances(&kind, spec, ctx.seed)?
                .into_iter()
                .map(|v| {
                    let mut m = base.clone();
                    m.extend(v.as_object().expect("generated params are objects").clone());
                    Value::Object(m)
                })
                .collect(),
            (None, Some(_)) => return Err(bad("`random` must be an object")),
            (None, None) => vec![Value::Object(base.clone())],
        };

        let run_one = |(index, params): (usize, &Value)| -> InstanceRecord {
            let params = strip_nulls(params.clone());
            let (outcome, budget_used) = chainwarn::measure_usage(|| execute(&kind, params.clone(), ctx));
            match outcome {
                Ok((_, Outcome { result, holds })) => InstanceRecord {
                    index,
                    status: if holds == Some(false) { "fail" } else { "pass" },
                    holds,
                    params,
                    budget_used,
                    result: Some(result),
                    error: None,
                },
                Err(e) => InstanceRecord {
                    index,
                    status: match e {
                        CliError::Budget(_) => "budget",
                        CliError::Internal(_) => "fail",
                        _ => "skipped",
                    },
                    holds: None,
                    params,
                    budget_used,
                    result: None,
                    error: Some(e.to_string()),
                },
            }
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.workers)
            .build()
            .map_err(|e| CliError::BadParams(format!("worker pool: {e}")))?;
        let mut records: Vec<InstanceRecord> = pool.install(|| instances.par_iter().enumerate().map(run_one).collect());
        records.sort_by_key(|r| r.index);
        // instances ran on pool threads; credit their usage to this one
        chainwarn::charge(records.iter().map(|r| r.budget_used).sum());

        Ok(summarize(&kind, records, ctx))
    }
}

/// Tallies records (already in index order) and attaches a reproducing
/// config to every failure.
fn summarize(kind: &str, records: Vec<InstanceRecord>, ctx: &Ctx) -> Outcome {
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        *tally.entry(r.status).or_default() += 1;
    }
    let failures: Vec<Value> = records
        .iter()
        .filter(|r| r.status == "fail")
        .map(|r| {
            json!({
                "index": r.index,
                "reason": r.error.clone().unwrap_or_else(|| "a bound check failed".into()),
                "config": {
                    "kind": kind,
                    "params": r.params,
                    "seed": ctx.seed,
                    "budget": ctx.budget.0,
                },
            })
        })
        .collect();
    let failed = failures.len();
    let out = json!({
        "kind": kind,
        "instances": records.len(),
        "passed": tally.get("pass").copied().unwrap_or(0),
        "failed": failed,
        "skipped": tally.get("skipped").copied().unwrap_or(0),
        "budget_exceeded": tally.get("budget").copied().unwrap_or(0),
        "budget_used": records.iter().map(|r| r.budget_used).sum::<u128>(),
        "failures": failures,
        "results": records,
    });
    Outcome { result: out, holds: Some(failed == 0) }
}

//! Batch driver for the chainwarn library: parse an experiment from flags
//! or a JSON config, run it, and write a JSON report.
//!
//! Exit codes: 0 pass, 1 bound violated, 2 unknown kind, 3 bad parameters,
//! 4 budget exceeded.

pub mod kinds;
pub mod sweep;
pub mod values;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use chainwarn::Budget;
use kinds::*;
use sweep::SweepArgs;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad kind: {0}")]
    BadKind(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::BadKind(_) => 2,
            CliError::BadParams(_) | CliError::Io(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl From<chainwarn::Error> for CliError {
    fn from(e: chainwarn::Error) -> Self {
        match e {
            chainwarn::Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            chainwarn::Error::Internal(_) => CliError::Internal(e.to_string()),
            other => CliError::BadParams(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "chainwarn", version, about = "Exhaustive verification of restricted-variable Warning-type bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config: `{"kind", "params", "seed", "budget"}`, or a bare params object.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also export a CSV table.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest enumeration or search size allowed.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The Alon-Furedi minimum m(a_1..a_n; N) with a minimizing vector.
    Mbound(MboundArgs),
    /// Solution count of a restricted system against its lower bound.
    VerifyMain(VerifyMainArgs),
    /// Points of a grid where a polynomial is nonzero, against the bound.
    AlonFuredi(AlonFurediArgs),
    /// The valuation lemma for every point of a ring.
    AfkLemma(AfkLemmaArgs),
    /// Davenport constant D(G), or D_A(G) with weights.
    Davenport(DavenportArgs),
    /// Fat Davenport constant D_A^B(G).
    FatDavenport(FatDavenportArgs),
    /// Weighted subsequence sums landing in a product target.
    Nweighted(NweightedArgs),
    /// Weighted sums with support size divisible by p^k.
    Egz(EgzArgs),
    /// Subfamilies whose union size lies in B mod m.
    Hypergraph(HypergraphArgs),
    /// The sharp atomic family for given (b, d, m, a).
    Schmitt(SchmittArgs),
    /// Divisible subgraphs counted three ways.
    Divisible(DivisibleArgs),
    /// Search for q-atomic multigraphs.
    AtomicSearch(AtomicSearchArgs),
    /// Closed form for the atomic edge number with d(G(r, q)).
    ScriptE(ScriptEArgs),
    /// Interpolation with restricted coefficients and fat targets.
    Interp(InterpArgs),
    /// Minimal degree of f with f(0) = 0 and f(x) in B_x.
    TroiZannier(TroiZannierArgs),
    /// Run one kind over a grid or seeded random instances.
    Sweep(SweepArgs),
    /// Run the kind named in the config file.
    Run,
}

impl Command {
    /// Kind name and the flags that were actually given.
    fn split(&self) -> (Option<&'static str>, Value) {
        fn v<T: Serialize>(x: &T) -> Value {
            serde_json::to_value(x).expect("flags serialize")
        }
        let (kind, flags) = match self {
            Command::Mbound(a) => ("mbound", v(a)),
            Command::VerifyMain(a) => ("verify-main", v(a)),
            Command::AlonFuredi(a) => ("alon-furedi", v(a)),
            Command::AfkLemma(a) => ("afk-lemma", v(a)),
            Command::Davenport(a) => ("davenport", v(a)),
            Command::FatDavenport(a) => ("fat-davenport", v(a)),
            Command::Nweighted(a) => ("nweighted", v(a)),
            Command::Egz(a) => ("egz", v(a)),
            Command::Hypergraph(a) => ("hypergraph", v(a)),
            Command::Schmitt(a) => ("schmitt", v(a)),
            Command::Divisible(a) => ("divisible", v(a)),
            Command::AtomicSearch(a) => ("atomic-search", v(a)),
            Command::ScriptE(a) => ("script-e", v(a)),
            Command::Interp(a) => ("interp", v(a)),
            Command::TroiZannier(a) => ("troi-zannier", v(a)),
            Command::Sweep(a) => ("sweep", v(a)),
            Command::Run => return (None, Value::Object(Map::new())),
        };
        (Some(kind), strip_nulls(flags))
    }
}

/// A config file. Without a `params` member, every member other than
/// `kind`, `seed` and `budget` is a parameter.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: Option<String>,
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub budget: Option<u64>,
}

impl ExperimentConfig {
    pub fn from_value(v: Value) -> Result<Self, CliError> {
        let Value::Object(mut m) = v else {
            return Err(CliError::BadParams("a config must be a JSON object".into()));
        };
        let take_u64 = |m: &mut Map<String, Value>, k: &str| -> Result<Option<u64>, CliError> {
            match m.remove(k) {
                None | Some(Value::Null) => Ok(None),
                Some(x) => x
                    .as_u64()
                    .map(Some)
                    .ok_or_else(|| CliError::BadParams(format!("`{k}` must be a nonnegative integer"))),
            }
        };
        let kind = match m.remove("kind") {
            None => None,
            Some(Value::String(s)) => Some(s),
            Some(_) => return Err(CliError::BadKind("kind must be a string".into())),
        };
        let seed = take_u64(&mut m, "seed")?;
        let budget = take_u64(&mut m, "budget")?;
        let params = match m.remove("params") {
            Some(Value::Object(p)) if m.is_empty() => p,
            Some(_) => return Err(CliError::BadParams("`params` must be the only other member and an object".into())),
            None => m,
        };
        Ok(ExperimentConfig { kind, params, seed, budget })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let v: Value =
            serde_json::from_str(&text).map_err(|e| CliError::BadParams(format!("{}: {e}", path.display())))?;
        Self::from_value(v)
    }
}

/// The report written for every successful run.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub config: Value,
    pub status: &'static str,
    pub holds: Option<bool>,
    pub result: Value,
    /// Grid points and search states charged against the budget.
    pub budget_used: u128,
    /// Excluded from the determinism contract.
    pub timing_ms: f64,
}

impl Report {
    /// The report without its timing, which is what reruns must reproduce.
    pub fn deterministic_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timing_ms");
        serde_json::to_string(&v).expect("report serializes")
    }
}

/// Runs `kind` with `params` and wraps the outcome in a report.
pub fn run(kind: &str, params: Value, seed: u64, budget: u64, workers: usize) -> Result<Report, CliError> {
    if budget == 0 {
        return Err(CliError::BadParams("budget must be positive".into()));
    }
    let ctx = Ctx { budget: Budget(budget), seed, workers };
    let start = Instant::now();
    let (outcome, budget_used) = chainwarn::measure_usage(|| execute(kind, params, &ctx));
    let (echo, out) = outcome?;
    let timing_ms = start.elapsed().as_secs_f64() * 1e3;
    let status = match out.holds {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "computed",
    };
    let config = serde_json::json!({"kind": kind, "params": echo, "seed": seed, "budget": budget});
    Ok(Report { config, status, holds: out.holds, result: out.result, budget_used, timing_ms })
}

/// `key.path -> scalar` rows for tables.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&join(k), x, out)),
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            xs.iter().enumerate().for_each(|(i, x)| flatten(&join(&i.to_string()), x, out))
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// One row per sweep instance, or `key,value` rows for a single run.
pub fn write_csv(path: &Path, report: &Report) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    if let Some(Value::Array(rows)) = report.result.get("results") {
        w.write_record(["index", "status", "holds", "params", "result"]).map_err(io)?;
        for r in rows {
            let cell =
                |k: &str| r.get(k).map(|x| if x.is_string() { x.as_str().unwrap().to_string() } else { x.to_string() });
            w.write_record([
                cell("index").unwrap_or_default(),
                cell("status").unwrap_or_default(),
                cell("holds").unwrap_or_default(),
                cell("params").unwrap_or_default(),
                r.get("result").or(r.get("error")).map(|x| x.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
    } else {
        let mut rows = Vec::new();
        flatten("", &report.result, &mut rows);
        w.write_record(["key", "value"]).map_err(io)?;
        for (k, v) in rows {
            w.write_record([k, v]).map_err(io)?;
        }
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

fn execute_cli(cli: Cli) -> Result<Report, CliError> {
    let config = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let (sub_kind, flags) = cli.command.split();
    let kind = match (sub_kind, &config.kind) {
        (Some(k), Some(c)) if k != c => {
            return Err(CliError::BadKind(format!("config kind `{c}` does not match subcommand `{k}`")))
        }
        (Some(k), _) => k.to_string(),
        (None, Some(c)) => c.clone(),
        (None, None) => return Err(CliError::BadKind("`run` needs a config with a `kind`".into())),
    };
    let mut params = config.params.clone();
    if let Value::Object(f) = flags {
        for (k, v) in f {
            if v != Value::Bool(false) {
                params.insert(k, v);
            }
        }
    }
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let budget = cli.budget.or(config.budget).unwrap_or(Budget::default().0);
    let report = run(&kind, Value::Object(params), seed, budget, cli.workers.unwrap_or(0))?;

    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &cli.out {
        Some(path) => {
            std::fs::write(path, json + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        }
        None if cli.format == Format::Json => {
            // a closed pipe (e.g. `| head`) is not an error of the run
            let _ = writeln!(std::io::stdout().lock(), "{json}");
        }
        None => {}
    }
    if cli.format == Format::Table {
        let mut rows = Vec::new();
        flatten("", &report.result, &mut rows);
        rows.push(("budget_used".into(), report.budget_used.to_string()));
        rows.push(("status".into(), report.status.into()));
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut stdout = std::io::stdout().lock();
        for (k, v) in rows {
            let _ = writeln!(stdout, "{k:<width$}  {v}");
        }
    }
    if let Some(path) = &cli.csv {
        write_csv(path, &report)?;
    }
    Ok(report)
}

/// Parses `args`, runs, and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 2,
                ErrorKind::InvalidSubcommand => 2,
                _ => 3,
            };
            let _ = e.print();
            return code;
        }
    };
    match execute_cli(cli) {
        Ok(r) => match r.holds {
            Some(false) => 1,
            _ => 0,
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_per_error() {
        let codes: Vec<i32> = [
            CliError::Internal(String::new()),
            CliError::BadKind(String::new()),
            CliError::BadParams(String::new()),
            CliError::Io(String::new()),
            CliError::Budget(String::new()),
        ]
        .iter()
        .map(CliError::exit_code)
        .collect();
        assert_eq!(codes, vec![1, 2, 3, 3, 4]);
    }
}

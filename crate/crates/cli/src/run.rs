use std::collections::BTreeSet;

use cubesample::constructions::{
    audit_locality_bounds, build_majority_proof_system, greedy_separator, majority_locality_bound, reduce_slice_to_u1,
    verify_image_within, AuditOptions, MajoritySystem, ProofSystem, VerifyMode,
};
use cubesample::exactdist::slice_union_distance;
use cubesample::frontier::{search_best_sampler, SearchConfig};
use cubesample::localfn::{influence_graph, locality_report};
use cubesample::rational::Exact;
use cubesample::sunflower::diagnostic::default_alpha;
use cubesample::sunflower::{find_robust_sunflower, robustness, u1_lower_bound_diagnostic, RobustMode};
use cubesample::switchnet::depth_sweep;
use cubesample::{
    rng, tv_distance, BitString, DecisionForest, Error, LocalFunction, SliceSpec, SwitchingNetwork,
    DEFAULT_ENUMERATION_LOG2,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::*;
use crate::error::{CliError, CliResult};

/// A finished experiment. Contains nothing that depends on the worker count
/// or wall clock, so equal configs render to equal bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub kind: Kind,
    pub seed: u64,
    pub budget: u32,
    pub parameters: Parameters,
    pub result: Value,
    #[serde(skip)]
    table: Option<Table>,
}

/// Plot-ready rows for kinds with a natural table.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn exact_cells(e: &Exact) -> [String; 3] {
    [e.0.numer().to_string(), e.0.denom().to_string(), cubesample::rational::to_f64(&e.0).to_string()]
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

/// Runs `cfg` on a pool of `workers` threads, or the global pool if `None`.
pub fn execute(cfg: &ExperimentConfig, workers: Option<usize>) -> CliResult<Report> {
    match workers {
        None => run_experiment(cfg),
        Some(0) => Err(CliError::Usage("--workers must be at least 1".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {w} workers: {e}")))?;
            pool.install(|| run_experiment(cfg))
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Report> {
    let budget = cfg.budget.unwrap_or(DEFAULT_ENUMERATION_LOG2);
    let seed = cfg.seed;
    let (result, table) = match &cfg.parameters {
        Parameters::Distance(p) => (distance(p, budget)?, None),
        Parameters::Construct(p) => (construct(p, budget)?, None),
        Parameters::Verify(p) => (verify(p, seed, budget)?, None),
        Parameters::Reduce(p) => (reduce(p, budget)?, None),
        Parameters::Sunflower(p) => (sunflower(p, seed)?, None),
        Parameters::Switchnet(p) => switchnet(p, seed, budget)?,
        Parameters::Frontier(p) => frontier(p, seed)?,
        Parameters::Diagnostic(p) => {
            let alpha = p.alpha.clone().unwrap_or_else(default_alpha);
            let r = u1_lower_bound_diagnostic(&p.forest, p.target_n.unwrap_or(p.forest.n()), &alpha, budget)?;
            (to_value(&r), None)
        }
        Parameters::Audit(p) => {
            let opts = AuditOptions { limit_log2: budget, samples: p.samples, seed };
            (to_value(&audit_locality_bounds(&p.function, p.claim, &opts)?), None)
        }
    };
    Ok(Report { kind: cfg.kind(), seed, budget, parameters: cfg.parameters.clone(), result, table })
}

fn distance(p: &DistanceParams, budget: u32) -> CliResult<Value> {
    Ok(match p {
        DistanceParams::Forest(ForestDistance { forest, target }) => {
            let x = forest.output_distribution_within(budget)?;
            json!({ "support": x.support_len(), "distance": Exact(tv_distance(&x, target)?) })
        }
        DistanceParams::Distribution(DistributionDistance { distribution, target }) => {
            json!({ "distance": Exact(tv_distance(distribution, target)?) })
        }
        DistanceParams::Pair(PairDistance { a, b }) => json!({ "distance": Exact(tv_distance(a, b)?) }),
        DistanceParams::Slices(SlicesDistance { a, b }) => json!({ "distance": Exact(tv_distance(a, b)?) }),
        DistanceParams::SliceUnion(SliceUnionDistance { n, weights }) => {
            let weights: BTreeSet<usize> = weights.iter().copied().collect();
            json!({ "distance": Exact(slice_union_distance(*n, &weights)?) })
        }
    })
}

fn output_distance(f: &DecisionForest, target: &SliceSpec, budget: u32) -> CliResult<Option<Exact>> {
    match f.output_distribution_within(budget) {
        Ok(x) => Ok(Some(Exact(tv_distance(&x, target)?))),
        Err(Error::Budget(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn construct(p: &ConstructParams, budget: u32) -> CliResult<Value> {
    Ok(match *p {
        ConstructParams::Parity(Size { n }) => {
            let f = cubesample::build_parity_sampler(n)?;
            let target = SliceSpec::even(n + 1)?;
            json!({
                "forest": f,
                "locality": locality_report(&f)?,
                "target": target,
                "distance": output_distance(&f, &target, budget)?,
            })
        }
        ConstructParams::Majority(Size { n }) => {
            let s = MajoritySystem::new(n)?;
            let g = influence_graph(&s)?;
            let bound = majority_locality_bound(n);
            json!({
                "system": s,
                "m": s.input_len(),
                "tree_depth": s.tree().depth(),
                "max_output_locality": g.max_output_locality(),
                "max_input_influence": g.max_input_influence(),
                "locality_bound": bound,
                "within_bound": g.max_output_locality() <= bound,
            })
        }
    })
}

fn verify(p: &VerifyParams, seed: u64, budget: u32) -> CliResult<Value> {
    let (system, mode, samples, targets) = match p {
        VerifyParams::Majority(MajorityVerify { n, mode, samples, targets }) => (build_majority_proof_system(*n)?, mode, samples, targets),
        VerifyParams::System(SystemVerify { system, mode, samples, targets }) => (system.clone(), mode, samples, targets),
    };
    let mode = match mode {
        VerifyModeName::Exhaustive => VerifyMode::Exhaustive,
        VerifyModeName::TwoSided => VerifyMode::TwoSided { samples: *samples, seed, targets: targets.clone() },
    };
    let verdict = verify_image_within(&system, &mode, budget)?;
    Ok(json!({ "system": system_summary(&system), "verdict": verdict }))
}

fn system_summary(s: &ProofSystem) -> Value {
    json!({ "language": s.language(), "m": s.function().input_len(), "n": s.function().output_len() })
}

fn reduce(p: &ReduceParams, budget: u32) -> CliResult<Value> {
    let n = p.forest.n();
    let g = reduce_slice_to_u1(&p.forest, p.k)?;
    let before = output_distance(&p.forest, &SliceSpec::single(n, p.k)?, budget)?;
    let after = output_distance(&g, &SliceSpec::single(g.n(), 1)?, budget)?;
    let equal = match (&before, &after) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };
    Ok(json!({
        "subsets": g.n(),
        "depth_before": p.forest.depth(),
        "depth_after": g.depth(),
        "distance_before": before,
        "distance_after": after,
        "equal": equal,
        "forest": g,
    }))
}

fn sunflower(p: &SunflowerParams, seed: u64) -> CliResult<Value> {
    Ok(match p {
        SunflowerParams::Find(FindSunflower { family, alpha, beta, strategy }) => {
            let w = find_robust_sunflower(family, alpha, beta, *strategy)?;
            json!({ "strategy": strategy, "found": w.is_some(), "witness": w })
        }
        SunflowerParams::Robustness(Robustness { family, alpha, mode, samples }) => {
            let mode = match mode {
                RobustModeName::Exact => RobustMode::Exact,
                RobustModeName::MonteCarlo => RobustMode::MonteCarlo { samples: *samples, seed },
            };
            to_value(&robustness(family, alpha, &mode)?)
        }
        SunflowerParams::Separator(Separator { family }) => to_value(&greedy_separator(family)?),
    })
}

fn switchnet(p: &SwitchnetParams, seed: u64, budget: u32) -> CliResult<(Value, Option<Table>)> {
    let (net, runs) = match p {
        SwitchnetParams::Analyze(AnalyzeNetwork { network, runs }) => (network.clone(), *runs),
        SwitchnetParams::Random(RandomNetwork { n, ell, depth, runs }) => (SwitchingNetwork::random(*n, *ell, *depth, seed)?, *runs),
        SwitchnetParams::Sweep(Sweep { n, ell, depths, seeds }) => {
            let rows = depth_sweep(*n, *ell, depths, seeds, budget)?;
            let table = Table {
                header: vec!["n", "ell", "depth", "seed", "exact", "num", "den", "approx"],
                rows: rows
                    .iter()
                    .map(|r| {
                        let mut row = vec![r.n.to_string(), r.ell.to_string(), r.depth.to_string(), r.seed.to_string(), r.exact.to_string()];
                        row.extend(exact_cells(&r.distance));
                        row
                    })
                    .collect(),
            };
            return Ok((json!({ "rows": rows }), Some(table)));
        }
    };
    let target = SliceSpec::single(net.n(), net.ell())?;
    let lower = net.distance_lower_bound();
    let exact = match net.distribution(budget) {
        Ok(d) => Some(Exact(tv_distance(&d, &target)?)),
        Err(Error::Budget(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let forest = net.to_forest();
    let on_slice = sampled_runs_on_slice(&net, runs, seed)?;
    Ok((
        json!({
            "network": net,
            "coins": net.coin_count(),
            "perfect": net.is_perfect(),
            "distance": exact,
            "distance_lower_bound": Exact(lower),
            "reachable": net.reachable_positions(),
            "forest_locality": locality_report(&forest)?,
            "runs": runs,
            "runs_on_slice": on_slice,
            "forest": forest,
        }),
        None,
    ))
}

fn sampled_runs_on_slice(net: &SwitchingNetwork, runs: u64, seed: u64) -> CliResult<u64> {
    let stream_seed = rng::derive(seed, 0x72756e73);
    let chunks: Vec<(u64, u64)> = rng::chunks(runs).collect();
    let counts = chunks
        .into_par_iter()
        .map(|(c, len)| {
            let mut r = rng::stream(stream_seed, c);
            let mut hits = 0u64;
            for _ in 0..len {
                let coins: BitString = rng::bits(&mut r, net.coin_count());
                if net.run(&coins)?.weight() == net.ell() {
                    hits += 1;
                }
            }
            Ok(hits)
        })
        .collect::<cubesample::Result<Vec<u64>>>()?;
    Ok(counts.into_iter().sum())
}

fn frontier(p: &FrontierParams, seed: u64) -> CliResult<(Value, Option<Table>)> {
    let cfg = SearchConfig {
        m: p.m,
        d: p.d,
        target: p.target.clone(),
        restarts: p.restarts,
        steps: p.steps,
        seed,
    };
    let r = search_best_sampler(&cfg, p.mode)?;
    let table = Table {
        header: vec!["restart", "step", "num", "den", "approx"],
        rows: r
            .trace
            .iter()
            .map(|t| {
                let mut row = vec![t.restart.to_string(), t.step.to_string()];
                row.extend(exact_cells(&t.distance));
                row
            })
            .collect(),
    };
    Ok((to_value(&r), Some(table)))
}

impl Report {
    pub fn render(&self, format: Format) -> CliResult<Vec<u8>> {
        match format {
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(self).expect("report serializes");
                out.push(b'\n');
                Ok(out)
            }
            Format::Csv => self.csv(),
        }
    }

    fn csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::io(None, e);
        match &self.table {
            Some(t) => {
                w.write_record(&t.header).map_err(csv_err)?;
                for row in &t.rows {
                    w.write_record(row).map_err(csv_err)?;
                }
            }
            None => {
                w.write_record(["field", "value"]).map_err(csv_err)?;
                let mut rows = Vec::new();
                flatten("", &self.result, &mut rows);
                for (k, v) in rows {
                    w.write_record([k, v]).map_err(csv_err)?;
                }
            }
        }
        w.into_inner().map_err(|e| CliError::io(None, e))
    }
}

/// Scalar leaves of `v` keyed by dotted path, arrays indexed as `a[i]`.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

//! The binary end to end, plus config round trips.

use std::path::Path;
use std::process::{Command, Output};

use cubesample::constructions::{build_majority_proof_system, LocalityClaim};
use cubesample::frontier::SearchMode;
use cubesample::rational::ratio;
use cubesample::sunflower::Strategy as FindStrategy;
use cubesample::{BitString, DecisionForest, DecisionTree, ExactDistribution, SetFamily, SliceSpec, SwitchingNetwork};
use cubesample_cli::config::*;
use cubesample_cli::{ExperimentConfig, Format, Parameters};
use proptest::prelude::*;
use serde_json::Value;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubesample")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn error_record(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().rev().find(|l| l.starts_with("{\"error\"")).unwrap_or_else(|| panic!("no record in {text}"));
    serde_json::from_str(line).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn parity_construction_reports_zero_distance() {
    let r = stdout_json(&bin(&["construct", "-p", "what=parity", "-p", "n=8"]));
    assert_eq!(r["result"]["forest"]["m"], 8);
    assert_eq!(r["result"]["forest"]["n"], 9);
    assert_eq!(r["result"]["distance"]["num"], "0");
    assert_eq!(r["result"]["distance"]["approx"], 0.0);
}

#[test]
fn majority_n3_image_has_four_members() {
    let r = stdout_json(&bin(&["verify", "-p", "what=majority", "-p", "n=3", "-p", "mode=exhaustive"]));
    assert_eq!(r["result"]["verdict"]["passed"], true);
    assert_eq!(r["result"]["verdict"]["image_size"], 4);
}

#[test]
fn identity_claimed_as_majority_system_is_refuted() {
    let id = r#"{"m":3,"n":3,"trees":[
        {"query":1,"on0":{"leaf":0},"on1":{"leaf":1}},
        {"query":2,"on0":{"leaf":0},"on1":{"leaf":1}},
        {"query":3,"on0":{"leaf":0},"on1":{"leaf":1}}]}"#;
    let params = format!(r#"{{"what":"system","mode":"exhaustive","system":{{"function":{{"forest":{id}}},"language":{{"majority":{{"n":3}}}}}}}}"#);
    let r = stdout_json(&bin(&["verify", "--params", &params]));
    assert_eq!(r["result"]["verdict"]["passed"], false);
    let ce: Vec<&str> = r["result"]["verdict"]["counterexamples"].as_array().unwrap().iter().filter_map(|c| c["output"].as_str()).collect();
    assert!(ce.contains(&"000"), "{ce:?}");
}

#[test]
fn malformed_configs_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"kind":"construct","parameters":{"what":"parity"},"seed":1}"#, 3, "parameters.n"),
        (r#"{"kind":"construct","parameters":{"what":"parity","n":3}}"#, 3, "seed"),
        (r#"{"kind":"frontier","parameters":{"m":2,"d":1,"target":{"n":2,"weights":[1]},"mode":"exhaustive","steps":-1},"seed":0}"#, 3, "parameters.steps"),
        (r#"{"kind":"shuffle","parameters":{},"seed":1}"#, 11, "kind"),
    ];
    for (i, (body, code, field)) in cases.iter().enumerate() {
        let path = write(dir.path(), &format!("c{i}.json"), body);
        let out = bin(&["run", "--config", &path]);
        assert_eq!(out.status.code(), Some(*code), "{body}");
        let r = error_record(&out);
        assert_eq!(r["error"]["code"], *code);
        assert_eq!(r["error"]["field"], *field, "{body}");
    }
    let out = bin(&["run", "--config", &write(dir.path(), "bad.json", "{not json")]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn module_errors_map_to_distinct_codes() {
    let dims = bin(&["dist", "--params", r#"{"what":"slices","a":{"n":2,"weights":[1]},"b":{"n":3,"weights":[1]}}"#]);
    let pre = bin(&["construct", "-p", "what=parity", "-p", "n=0"]);
    let budget = bin(&["--budget", "4", "verify", "-p", "what=majority", "-p", "n=5", "-p", "mode=exhaustive"]);
    let io = bin(&["run", "--config", "/definitely/not/here.json"]);
    let usage = bin(&["construct", "--no-such-flag"]);
    let got: Vec<(Option<i32>, Value)> = [&dims, &pre, &budget, &io]
        .iter()
        .map(|o| (o.status.code(), error_record(o)["error"]["kind"].clone()))
        .collect();
    assert_eq!(got[0], (Some(4), "dimension".into()));
    assert_eq!(got[1], (Some(7), "precondition".into()));
    assert_eq!(got[2], (Some(5), "budget".into()));
    assert_eq!(got[3], (Some(10), "io".into()));
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn subcommand_and_config_kind_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "c.json", r#"{"kind":"construct","parameters":{"what":"parity","n":3},"seed":0}"#);
    assert_eq!(bin(&["verify", "--config", &path]).status.code(), Some(2));
    let ok = stdout_json(&bin(&["construct", "--config", &path, "-p", "n=4"]));
    assert_eq!(ok["parameters"]["n"], 4);
}

#[test]
fn output_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = bin(&[
        "--format", "csv", "-o", out.to_str().unwrap(), "dist", "-p", "what=slice-union", "-p", "n=4", "-p", "weights=[1,2]",
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("field,value\n"), "{text}");
    assert!(text.contains("distance.num,"));
}

#[test]
fn seed_flag_changes_sampled_reports_only_through_the_seed() {
    let run = |seed: &str, workers: &str| {
        bin(&["--seed", seed, "--workers", workers, "switchnet", "-p", "what=random", "-p", "n=8", "-p", "ell=2", "-p", "depth=2", "-p", "runs=2000"])
            .stdout
    };
    assert_eq!(run("5", "1"), run("5", "3"));
    assert_ne!(run("5", "1"), run("6", "1"));
}

#[test]
fn help_exits_cleanly() {
    assert!(bin(&["--help"]).status.success());
    assert!(bin(&["frontier", "--help"]).status.success());
}

fn tree_over(free: Vec<usize>, depth: u32) -> BoxedStrategy<DecisionTree> {
    let leaf = any::<bool>().prop_map(DecisionTree::leaf);
    if depth == 0 || free.is_empty() {
        return leaf.boxed();
    }
    let node = prop::sample::select(free.clone()).prop_flat_map(move |v| {
        let rest: Vec<usize> = free.iter().copied().filter(|&u| u != v).collect();
        (tree_over(rest.clone(), depth - 1), tree_over(rest, depth - 1))
            .prop_map(move |(a, b)| DecisionTree::query(v, a, b))
    });
    prop_oneof![1 => leaf, 3 => node].boxed()
}

fn forest() -> impl Strategy<Value = DecisionForest> {
    (1usize..=5, 1usize..=4).prop_flat_map(|(m, n)| {
        prop::collection::vec(tree_over((1..=m).collect(), 3), n).prop_map(move |t| DecisionForest::new(m, t).unwrap())
    })
}

fn slice() -> impl Strategy<Value = SliceSpec> {
    (1usize..=12).prop_flat_map(|n| prop::collection::btree_set(0..=n, 1..=3).prop_map(move |w| SliceSpec::new(n, w).unwrap()))
}

fn distribution(n: usize) -> impl Strategy<Value = ExactDistribution> {
    prop::collection::btree_map(0u64..1 << n, 1i64..=9, 1..=4).prop_map(move |w| {
        let total: i64 = w.values().sum();
        ExactDistribution::new(n, w.into_iter().map(|(x, c)| (BitString::from_index(n, x), ratio(c, total)))).unwrap()
    })
}

fn family() -> impl Strategy<Value = SetFamily> {
    (1usize..=10).prop_flat_map(|u| {
        prop::collection::btree_set(0u64..1 << u, 1..=6).prop_map(move |s| SetFamily::new(u, s.into_iter().collect()).unwrap())
    })
}

fn fraction() -> impl Strategy<Value = cubesample::Rational> {
    (1i64..=8, 1i64..=8).prop_map(|(a, b)| ratio(a.min(b), a.max(b)))
}

fn parameters() -> impl Strategy<Value = Parameters> {
    use Parameters as P;
    let distance = prop_oneof![
        (forest(), slice()).prop_map(|(forest, target)| DistanceParams::Forest(ForestDistance { forest, target })),
        (1usize..=4).prop_flat_map(|n| (distribution(n), distribution(n)))
            .prop_map(|(a, b)| DistanceParams::Pair(PairDistance { a, b })),
        (1usize..=4).prop_flat_map(|n| (distribution(n), (0..=n).prop_map(move |k| SliceSpec::single(n, k).unwrap())))
            .prop_map(|(distribution, target)| DistanceParams::Distribution(DistributionDistance { distribution, target })),
        (slice(), slice()).prop_map(|(a, b)| DistanceParams::Slices(SlicesDistance { a, b })),
        (1usize..=30, prop::collection::vec(0usize..=30, 1..=4))
            .prop_map(|(n, weights)| DistanceParams::SliceUnion(SliceUnionDistance { n, weights })),
    ]
    .prop_map(P::Distance);
    let construct = prop_oneof![
        (1usize..=64).prop_map(|n| ConstructParams::Parity(Size { n })),
        (0usize..=50).prop_map(|h| ConstructParams::Majority(Size { n: 2 * h + 1 })),
    ]
    .prop_map(P::Construct);
    let mode = prop_oneof![Just(VerifyModeName::Exhaustive), Just(VerifyModeName::TwoSided)];
    let targets = prop::option::of(prop::collection::vec(
        prop::collection::vec(any::<bool>(), 5).prop_map(BitString::from_bits),
        0..=3,
    ));
    let verify = prop_oneof![
        (0usize..=10, mode.clone(), 1u64..=1_000_000, targets.clone())
            .prop_map(|(h, mode, samples, targets)| VerifyParams::Majority(MajorityVerify { n: 2 * h + 1, mode, samples, targets })),
        (1usize..=4, mode, 1u64..=1000, targets).prop_map(|(h, mode, samples, targets)| {
            let system = build_majority_proof_system(2 * h + 1).unwrap();
            VerifyParams::System(SystemVerify { system, mode, samples, targets })
        }),
    ]
    .prop_map(P::Verify);
    let reduce = (forest(), 1usize..=4).prop_map(|(forest, k)| P::Reduce(ReduceParams { forest, k }));
    let strategy = prop_oneof![Just(FindStrategy::Exhaustive), Just(FindStrategy::Heuristic)];
    let robust = prop_oneof![Just(RobustModeName::Exact), Just(RobustModeName::MonteCarlo)];
    let sunflower = prop_oneof![
        (family(), fraction(), fraction(), strategy)
            .prop_map(|(family, alpha, beta, strategy)| SunflowerParams::Find(FindSunflower { family, alpha, beta, strategy })),
        (family(), fraction(), robust, 1u64..=100_000)
            .prop_map(|(family, alpha, mode, samples)| SunflowerParams::Robustness(Robustness { family, alpha, mode, samples })),
        family().prop_map(|family| SunflowerParams::Separator(Separator { family })),
    ]
    .prop_map(P::Sunflower);
    let switchnet = prop_oneof![
        (1usize..=16, 0usize..=3, any::<u64>(), 0u64..=1000).prop_flat_map(|(n, depth, seed, runs)| {
            (0..=n).prop_map(move |ell| {
                let network = SwitchingNetwork::random(n, ell, depth, seed).unwrap();
                SwitchnetParams::Analyze(AnalyzeNetwork { network, runs })
            })
        }),
        (1usize..=40, 0usize..=40, 0usize..=8, 0u64..=1000)
            .prop_map(|(n, ell, depth, runs)| SwitchnetParams::Random(RandomNetwork { n, ell, depth, runs })),
        (1usize..=40, 0usize..=40, prop::collection::vec(0usize..=8, 1..=4), prop::collection::vec(any::<u64>(), 1..=4))
            .prop_map(|(n, ell, depths, seeds)| SwitchnetParams::Sweep(Sweep { n, ell, depths, seeds })),
    ]
    .prop_map(P::Switchnet);
    let search = prop_oneof![Just(SearchMode::Exhaustive), Just(SearchMode::Hillclimb)];
    let frontier = (1usize..=6, 0usize..=3, slice(), search, 1usize..=50, 1usize..=500).prop_map(
        |(m, d, target, mode, restarts, steps)| P::Frontier(FrontierParams { m, d, target, mode, restarts, steps }),
    );
    let diagnostic = (forest(), prop::option::of(1usize..=40), prop::option::of(fraction()))
        .prop_map(|(forest, target_n, alpha)| P::Diagnostic(DiagnosticParams { forest, target_n, alpha }));
    let claim = prop_oneof![Just(LocalityClaim::Majority), Just(LocalityClaim::Code)];
    let audit = (1usize..=6, claim, 1u64..=100_000).prop_map(|(h, claim, samples)| {
        let function = build_majority_proof_system(2 * h + 1).unwrap().function().clone();
        P::Audit(AuditParams { function, claim, samples })
    });
    prop_oneof![distance, construct, verify, reduce, sunflower, switchnet, frontier, diagnostic, audit]
}

fn config() -> impl Strategy<Value = ExperimentConfig> {
    let format = prop_oneof![Just(Format::Json), Just(Format::Csv)];
    let output = prop::option::of((prop::option::of("[a-z]{1,8}\\.(json|csv)"), format))
        .prop_map(|o| o.map(|(path, format)| OutputSpec { path: path.map(Into::into), format }));
    (parameters(), any::<u64>(), prop::option::of(1u32..=40), output).prop_map(|(parameters, seed, budget, output)| {
        ExperimentConfig { parameters, seed, budget, output }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn configs_round_trip(cfg in config()) {
        let text = cfg.to_json();
        let back = ExperimentConfig::from_json(&text).map_err(|e| TestCaseError::fail(format!("{e}: {text}")))?;
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json(), text);
    }
}

//! Experiment configuration: one record per run with a kind, kind-specific
//! parameters, an explicit seed and an optional output target.
//!
//! Parameters are parsed in two steps so that a schema failure can name the
//! offending field: the outer record first, then `parameters` against the
//! schema chosen by `kind`.

use std::path::PathBuf;

use cubesample::constructions::{LocalityClaim, ProofFunction, ProofSystem};
use cubesample::frontier::SearchMode;
use cubesample::sunflower::Strategy;
use cubesample::{BitString, DecisionForest, ExactDistribution, Rational, SetFamily, SliceSpec, SwitchingNetwork};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Distance,
    Construct,
    Verify,
    Reduce,
    Sunflower,
    Switchnet,
    Frontier,
    Diagnostic,
    Audit,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Distance => "distance",
            Kind::Construct => "construct",
            Kind::Verify => "verify",
            Kind::Reduce => "reduce",
            Kind::Sunflower => "sunflower",
            Kind::Switchnet => "switchnet",
            Kind::Frontier => "frontier",
            Kind::Diagnostic => "diagnostic",
            Kind::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// Rationals in parameters are written as strings such as `"1/4"` or
/// `"0.25"`; bare JSON numbers are accepted too.
mod rational_text {
    use super::*;

    pub fn serialize<S: serde::Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = match Value::deserialize(d)? {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a rational such as \"1/4\", got {other}"))),
        };
        cubesample::rational::parse(&text).map_err(serde::de::Error::custom)
    }
}

mod opt_rational_text {
    use super::*;

    pub fn serialize<S: serde::Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => rational_text::serialize(r, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        rational_text::deserialize(d).map(Some)
    }
}

fn default_samples() -> u64 {
    100_000
}

fn default_restarts() -> usize {
    20
}

fn default_steps() -> usize {
    200
}

/// Parameter schemas that are parsed from a JSON value with a located
/// error.
trait FromParams: Sized {
    fn from_params(v: Value) -> CliResult<Self>;
}

fn located<T: serde::de::DeserializeOwned>(v: Value) -> CliResult<T> {
    serde_path_to_error::deserialize(v).map_err(|e| schema_error("parameters", &e))
}

/// Enums tagged by a `what` field. The tag is split off by hand and the
/// rest parsed straight into the variant's struct, which keeps the serde
/// path intact.
macro_rules! tagged {
    ($ty:ident { $($tag:literal => $variant:ident($inner:ty)),+ $(,)? }) => {
        impl FromParams for $ty {
            fn from_params(v: Value) -> CliResult<Self> {
                let Value::Object(mut m) = v else {
                    return Err(CliError::schema("parameters", "expected an object"));
                };
                let what = match m.remove("what") {
                    Some(Value::String(s)) => s,
                    Some(other) => return Err(CliError::schema("parameters.what", format!("expected a string, got {other}"))),
                    None => return Err(CliError::schema("parameters.what", "missing field `what`")),
                };
                match what.as_str() {
                    $($tag => located::<$inner>(Value::Object(m)).map($ty::$variant),)+
                    other => Err(CliError::schema(
                        "parameters.what",
                        format!("unknown variant `{other}`, expected one of {}", [$($tag),+].join(", ")),
                    )),
                }
            }
        }
    };
}

macro_rules! plain {
    ($($ty:ty),+) => {
        $(impl FromParams for $ty {
            fn from_params(v: Value) -> CliResult<Self> {
                located(v)
            }
        })+
    };
}

/// Output distribution of a forest against a slice union.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestDistance {
    pub forest: DecisionForest,
    pub target: SliceSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionDistance {
    pub distribution: ExactDistribution,
    pub target: SliceSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDistance {
    pub a: ExactDistribution,
    pub b: ExactDistribution,
}

/// Two slice unions sharing a length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlicesDistance {
    pub a: SliceSpec,
    pub b: SliceSpec,
}

/// `Delta(U_k^n, U_S^n)` with `k = max S`, by the closed form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceUnionDistance {
    pub n: usize,
    pub weights: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "what", rename_all = "kebab-case")]
pub enum DistanceParams {
    Forest(ForestDistance),
    Distribution(DistributionDistance),
    Pair(PairDistance),
    Slices(SlicesDistance),
    SliceUnion(SliceUnionDistance),
}

tagged!(DistanceParams {
    "forest" => Forest(ForestDistance),
    "distribution" => Distribution(DistributionDistance),
    "pair" => Pair(PairDistance),
    "slices" => Slices(SlicesDistance),
    "slice-union" => SliceUnion(SliceUnionDistance),
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Size {
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "what", rename_all = "kebab-case")]
pub enum ConstructParams {
    Parity(Size),
    Majority(Size),
}

tagged!(ConstructParams { "parity" => Parity(Size), "majority" => Majority(Size) });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyModeName {
    Exhaustive,
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MajorityVerify {
    pub n: usize,
    pub mode: VerifyModeName,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<BitString>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemVerify {
    pub system: ProofSystem,
    pub mode: VerifyModeName,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<BitString>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "what", rename_all = "kebab-case")]
pub enum VerifyParams {
    Majority(MajorityVerify),
    System(SystemVerify),
}

tagged!(VerifyParams { "majority" => Majority(MajorityVerify), "system" => System(SystemVerify) });

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReduceParams {
    pub forest: DecisionForest,
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RobustModeName {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FindSunflower {
    pub family: SetFamily,
    #[serde(with = "rational_text")]
    pub alpha: Rational,
    #[serde(with = "rational_text")]
    pub beta: Rational,
    #[serde(default = "default_strategy")]
    pub strategy: Strategy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Robustness {
    pub family: SetFamily,
    #[serde(with = "rational_text")]
    pub alpha: Rational,
    #[serde(default = "default_robust_mode")]
    pub mode: RobustModeName,
    #[serde(default = "default_samples")]
    pub samples: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Separator {
    pub family: SetFamily,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "what", rename_all = "kebab-case")]
pub enum SunflowerParams {
    Find(FindSunflower),
    Robustness(Robustness),
    Separator(Separator),
}

tagged!(SunflowerParams {
    "find" => Find(FindSunflower),
    "robustness" => Robustness(Robustness),
    "separator" => Separator(Separator),
});

fn default_strategy() -> Strategy {
    Strategy::Heuristic
}

fn default_robust_mode() -> RobustModeName {
    RobustModeName::Exact
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeNetwork {
    pub network: SwitchingNetwork,
    #[serde(default)]
    pub runs: u64,
}

/// A network drawn from the experiment seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomNetwork {
    pub n: usize,
    pub ell: usize,
    pub depth: usize,
    #[serde(default)]
    pub runs: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub n: usize,
    pub ell: usize,
    pub depths: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "what", rename_all = "kebab-case")]
pub enum SwitchnetParams {
    Analyze(AnalyzeNetwork),
    Random(RandomNetwork),
    Sweep(Sweep),
}

tagged!(SwitchnetParams {
    "analyze" => Analyze(AnalyzeNetwork),
    "random" => Random(RandomNetwork),
    "sweep" => Sweep(Sweep),
});

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierParams {
    pub m: usize,
    pub d: usize,
    pub target: SliceSpec,
    pub mode: SearchMode,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticParams {
    pub forest: DecisionForest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_n: Option<usize>,
    #[serde(default, with = "opt_rational_text", skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditParams {
    pub function: ProofFunction,
    pub claim: LocalityClaim,
    #[serde(default = "default_samples")]
    pub samples: u64,
}

plain!(ReduceParams, FrontierParams, DiagnosticParams, AuditParams);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    Distance(DistanceParams),
    Construct(ConstructParams),
    Verify(VerifyParams),
    Reduce(ReduceParams),
    Sunflower(SunflowerParams),
    Switchnet(SwitchnetParams),
    Frontier(FrontierParams),
    Diagnostic(DiagnosticParams),
    Audit(AuditParams),
}

impl Parameters {
    pub fn kind(&self) -> Kind {
        match self {
            Parameters::Distance(_) => Kind::Distance,
            Parameters::Construct(_) => Kind::Construct,
            Parameters::Verify(_) => Kind::Verify,
            Parameters::Reduce(_) => Kind::Reduce,
            Parameters::Sunflower(_) => Kind::Sunflower,
            Parameters::Switchnet(_) => Kind::Switchnet,
            Parameters::Frontier(_) => Kind::Frontier,
            Parameters::Diagnostic(_) => Kind::Diagnostic,
            Parameters::Audit(_) => Kind::Audit,
        }
    }

    /// Parses `value` against the schema of `kind`; errors are located
    /// relative to `parameters`.
    pub fn parse(kind: Kind, value: Value) -> CliResult<Self> {
        Ok(match kind {
            Kind::Distance => Parameters::Distance(FromParams::from_params(value)?),
            Kind::Construct => Parameters::Construct(FromParams::from_params(value)?),
            Kind::Verify => Parameters::Verify(FromParams::from_params(value)?),
            Kind::Reduce => Parameters::Reduce(FromParams::from_params(value)?),
            Kind::Sunflower => Parameters::Sunflower(FromParams::from_params(value)?),
            Kind::Switchnet => Parameters::Switchnet(FromParams::from_params(value)?),
            Kind::Frontier => Parameters::Frontier(FromParams::from_params(value)?),
            Kind::Diagnostic => Parameters::Diagnostic(FromParams::from_params(value)?),
            Kind::Audit => Parameters::Audit(FromParams::from_params(value)?),
        })
    }
}

/// Names the failing field: the serde path when it goes below the root,
/// otherwise the field quoted in the message.
fn schema_error<E: std::fmt::Display>(prefix: &str, e: &serde_path_to_error::Error<E>) -> CliError {
    let message = e.inner().to_string();
    let path = e.path().to_string();
    let field = if path != "." && !path.is_empty() {
        Some(format!("{prefix}.{path}"))
    } else {
        quoted_field(&message).map(|f| format!("{prefix}.{f}")).or_else(|| Some(prefix.to_string()))
    };
    CliError::Schema { field, message }
}

fn quoted_field(message: &str) -> Option<&str> {
    let at = message.find("field `")? + "field `".len();
    let rest = &message[at..];
    rest.find('`').map(|end| &rest[..end])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub parameters: Parameters,
    pub seed: u64,
    /// Log2 enumeration budget; the library default when absent.
    pub budget: Option<u32>,
    pub output: Option<OutputSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: Kind,
    parameters: Value,
    seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    budget: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<OutputSpec>,
}

impl ExperimentConfig {
    pub fn new(parameters: Parameters, seed: u64) -> Self {
        ExperimentConfig { parameters, seed, budget: None, output: None }
    }

    pub fn kind(&self) -> Kind {
        self.parameters.kind()
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        if let Ok(Value::Object(doc)) = serde_json::from_str::<Value>(text) {
            if let Some(Value::String(k)) = doc.get("kind") {
                if serde_json::from_value::<Kind>(Value::String(k.clone())).is_err() {
                    return Err(CliError::UnknownKind(k.clone()));
                }
            }
        }
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let f = e.path().to_string();
            let message = e.inner().to_string();
            let field = if f != "." && !f.is_empty() { Some(f) } else { quoted_field(&message).map(str::to_string) };
            CliError::Schema { field, message }
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> CliResult<Self> {
        Ok(ExperimentConfig {
            parameters: Parameters::parse(raw.kind, raw.parameters)?,
            seed: raw.seed,
            budget: raw.budget,
            output: raw.output,
        })
    }

    pub fn to_json(&self) -> String {
        let raw = RawConfig {
            kind: self.kind(),
            parameters: serde_json::to_value(&self.parameters).expect("parameters serialize"),
            seed: self.seed,
            budget: self.budget,
            output: self.output.clone(),
        };
        serde_json::to_string_pretty(&raw).expect("config serializes")
    }

    pub fn read(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(Some(path), e))?;
        Self::from_json(&text)
    }
}

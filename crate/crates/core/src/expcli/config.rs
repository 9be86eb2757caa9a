//! Experiment configuration.
//!
//! A config file is JSON:
//!
//! ```json
//! { "experiment": "bimodal_cut", "params": { "offsets": [1, 4, 7], "seeds": 5 }, "output_dir": "out" }
//! ```
//!
//! Every key is optional. Unknown keys, at the top level or inside `params`,
//! are rejected. The accepted `params` keys per experiment are the fields of
//! the matching struct below; defaults reproduce the acceptance runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::neuralscore::TrainConfig;

pub const DEFAULT_MASTER_SEED: u64 = 42;
pub const DEFAULT_SEEDS: usize = 20;
pub const DEFAULT_OUTPUT_DIR: &str = "smlab-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    BimodalCut,
    BimodalNocut,
    Oscillating,
    NeuralBimodal,
    FunctionalSweep,
    DiscreteSuite,
    RademacherGaussian,
    AppendixLyu,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::BimodalCut,
        Experiment::BimodalNocut,
        Experiment::Oscillating,
        Experiment::NeuralBimodal,
        Experiment::FunctionalSweep,
        Experiment::DiscreteSuite,
        Experiment::RademacherGaussian,
        Experiment::AppendixLyu,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::BimodalCut => "bimodal_cut",
            Experiment::BimodalNocut => "bimodal_nocut",
            Experiment::Oscillating => "oscillating",
            Experiment::NeuralBimodal => "neural_bimodal",
            Experiment::FunctionalSweep => "functional_sweep",
            Experiment::DiscreteSuite => "discrete_suite",
            Experiment::RademacherGaussian => "rademacher_gaussian",
            Experiment::AppendixLyu => "appendix_lyu",
        }
    }

    /// Parses `params` into this experiment's parameter struct.
    pub fn resolve(self, params: &BTreeMap<String, Value>) -> Result<ExperimentParams> {
        let map: serde_json::Map<String, Value> = params.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        let value = Value::Object(map);
        let p = match self {
            Experiment::BimodalCut => ExperimentParams::BimodalCut(parse(self, value)?),
            Experiment::BimodalNocut => ExperimentParams::BimodalNocut(parse(self, value)?),
            Experiment::Oscillating => ExperimentParams::Oscillating(parse(self, value)?),
            Experiment::NeuralBimodal => ExperimentParams::NeuralBimodal(parse(self, value)?),
            Experiment::FunctionalSweep => ExperimentParams::FunctionalSweep(parse(self, value)?),
            Experiment::DiscreteSuite => ExperimentParams::DiscreteSuite(parse(self, value)?),
            Experiment::RademacherGaussian => ExperimentParams::RademacherGaussian(parse(self, value)?),
            Experiment::AppendixLyu => ExperimentParams::AppendixLyu(parse(self, value)?),
        };
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

fn parse<T: DeserializeOwned>(exp: Experiment, value: Value) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::Config(format!("{exp} params: {e}")))
}

/// `bimodal_cut` and `bimodal_nocut`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    /// Mode offsets `a`, each in `[1, 7]`.
    pub offsets: Vec<f64>,
    /// Samples per replicate, at least `10⁴`.
    pub n: usize,
    pub seeds: usize,
    pub master_seed: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            offsets: (1..=7).map(f64::from).collect(),
            n: 100_000,
            seeds: DEFAULT_SEEDS,
            master_seed: DEFAULT_MASTER_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OscillatingParams {
    pub omegas: Vec<f64>,
    pub n: usize,
    /// Monte Carlo replicates; 0 keeps only the sampling-free rows.
    pub seeds: usize,
    pub master_seed: u64,
}

impl Default for OscillatingParams {
    fn default() -> Self {
        Self {
            omegas: vec![1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            n: 100_000,
            seeds: DEFAULT_SEEDS,
            master_seed: DEFAULT_MASTER_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeuralParams {
    /// Mixture half-separations `a` of `½N(−a,1) + ½N(a,1)`.
    pub offsets: Vec<f64>,
    pub seeds: usize,
    pub master_seed: u64,
    pub width: usize,
    pub steps: usize,
    pub batch: usize,
    pub step_size: f64,
}

impl Default for NeuralParams {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            offsets: vec![2.0, 4.0, 6.0],
            seeds: 10,
            master_seed: DEFAULT_MASTER_SEED,
            width: t.width,
            steps: t.steps,
            batch: t.batch,
            step_size: t.step_size,
        }
    }
}

impl NeuralParams {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            width: self.width,
            steps: self.steps,
            batch: self.batch,
            step_size: self.step_size,
            seed: self.master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FunctionalParams {
    /// Offsets of the bimodal quartic densities; the standard normal is always included.
    pub offsets: Vec<f64>,
    pub grid_n: usize,
}

impl Default for FunctionalParams {
    fn default() -> Self {
        Self {
            offsets: (1..=7).map(f64::from).collect(),
            grid_n: crate::functional::DEFAULT_NODES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiscreteParams {
    /// Sample sizes for the two-spin Ising fits.
    pub sizes: Vec<usize>,
    pub seeds: usize,
    pub master_seed: u64,
    /// True coupling of the two-spin model (fields are zero).
    pub coupling: f64,
    /// Random `d = 3` instances for the identity checks.
    pub identity_instances: usize,
    pub at_restarts: usize,
    /// Leakage levels of the two-point mixture on `{±1}⁴`.
    pub mixture_eps: Vec<f64>,
}

impl Default for DiscreteParams {
    fn default() -> Self {
        Self {
            sizes: vec![1_000, 10_000, 100_000],
            seeds: DEFAULT_SEEDS,
            master_seed: DEFAULT_MASTER_SEED,
            coupling: 0.8,
            identity_instances: 100,
            at_restarts: 10,
            mixture_eps: vec![0.1, 0.03, 0.01],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianCase {
    pub r: f64,
    pub d: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RademacherParams {
    pub cases: Vec<GaussianCase>,
    pub master_seed: u64,
}

impl Default for RademacherParams {
    fn default() -> Self {
        Self {
            cases: vec![GaussianCase { r: 1.0, d: 1, n: 100 }, GaussianCase { r: 2.0, d: 5, n: 400 }],
            master_seed: DEFAULT_MASTER_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyuParams {
    /// Offset of `N(μ, 1)` against `N(0, 1)`.
    pub gaussian_shift: f64,
    /// Offset of the bimodal quartic density compared with `N(0, 1)`.
    pub bimodal_offset: f64,
    /// Grid spacing; must resolve the smoothing kernel at `t₀`.
    pub spacing: f64,
}

impl Default for LyuParams {
    fn default() -> Self {
        Self { gaussian_shift: 0.5, bimodal_offset: 1.0, spacing: 0.005 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ExperimentParams {
    BimodalCut(SweepParams),
    BimodalNocut(SweepParams),
    Oscillating(OscillatingParams),
    NeuralBimodal(NeuralParams),
    FunctionalSweep(FunctionalParams),
    DiscreteSuite(DiscreteParams),
    RademacherGaussian(RademacherParams),
    AppendixLyu(LyuParams),
}

impl ExperimentParams {
    pub fn experiment(&self) -> Experiment {
        match self {
            ExperimentParams::BimodalCut(_) => Experiment::BimodalCut,
            ExperimentParams::BimodalNocut(_) => Experiment::BimodalNocut,
            ExperimentParams::Oscillating(_) => Experiment::Oscillating,
            ExperimentParams::NeuralBimodal(_) => Experiment::NeuralBimodal,
            ExperimentParams::FunctionalSweep(_) => Experiment::FunctionalSweep,
            ExperimentParams::DiscreteSuite(_) => Experiment::DiscreteSuite,
            ExperimentParams::RademacherGaussian(_) => Experiment::RademacherGaussian,
            ExperimentParams::AppendixLyu(_) => Experiment::AppendixLyu,
        }
    }

    pub fn default_for(exp: Experiment) -> Self {
        exp.resolve(&BTreeMap::new()).expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let finite_positive = |v: f64| v.is_finite() && v > 0.0;
        match self {
            ExperimentParams::BimodalCut(p) | ExperimentParams::BimodalNocut(p) => {
                if p.offsets.is_empty() || p.offsets.iter().any(|a| !(1.0..=7.0).contains(a)) {
                    return bad(format!("offsets must be a nonempty subset of [1, 7], got {:?}", p.offsets));
                }
                if p.n < 10_000 {
                    return bad(format!("n must be at least 10000, got {}", p.n));
                }
                if p.seeds == 0 {
                    return bad("seeds must be positive".into());
                }
            }
            ExperimentParams::Oscillating(p) => {
                if p.omegas.is_empty() || !p.omegas.iter().all(|w| finite_positive(*w)) {
                    return bad(format!("omegas must be positive, got {:?}", p.omegas));
                }
                if p.seeds > 0 && p.n < 2 {
                    return bad("n must be at least 2".into());
                }
            }
            ExperimentParams::NeuralBimodal(p) => {
                if p.offsets.is_empty() || !p.offsets.iter().all(|a| finite_positive(*a)) {
                    return bad(format!("offsets must be positive, got {:?}", p.offsets));
                }
                if p.seeds == 0 {
                    return bad("seeds must be positive".into());
                }
                p.train_config().validate().map_err(|e| Error::Config(e.to_string()))?;
            }
            ExperimentParams::FunctionalSweep(p) => {
                if !p.offsets.iter().all(|a| finite_positive(*a)) {
                    return bad(format!("offsets must be positive, got {:?}", p.offsets));
                }
                if p.grid_n < 16 {
                    return bad(format!("grid_n must be at least 16, got {}", p.grid_n));
                }
            }
            ExperimentParams::DiscreteSuite(p) => {
                if p.sizes.is_empty() || p.sizes.contains(&0) || p.seeds == 0 {
                    return bad("sizes and seeds must be positive".into());
                }
                if !p.coupling.is_finite() || p.at_restarts == 0 {
                    return bad("coupling must be finite and at_restarts positive".into());
                }
                if !p.mixture_eps.iter().all(|e| *e > 0.0 && *e < 1.0) {
                    return bad(format!("mixture_eps must lie in (0, 1), got {:?}", p.mixture_eps));
                }
            }
            ExperimentParams::RademacherGaussian(p) => {
                if p.cases.is_empty() || p.cases.iter().any(|c| !(c.r >= 0.0) || c.d == 0 || c.n == 0) {
                    return bad("cases need r ≥ 0, d > 0 and n > 0".into());
                }
            }
            ExperimentParams::AppendixLyu(p) => {
                if !finite_positive(p.spacing) || !p.gaussian_shift.is_finite() || !finite_positive(p.bimodal_offset) {
                    return bad("spacing and bimodal_offset must be positive, gaussian_shift finite".into());
                }
            }
        }
        Ok(())
    }
}

/// The file format. Everything optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    pub output_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seeds: Option<usize>,
    pub n: Option<usize>,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: ExperimentParams,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        Self {
            experiment,
            params: ExperimentParams::default_for(experiment),
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }

    /// Merges file and flags. A flag that the experiment does not accept is
    /// an error, as is a file naming a different experiment.
    pub fn resolve(experiment: Experiment, file: ConfigFile, overrides: &Overrides) -> Result<Self> {
        if let Some(named) = file.experiment {
            if named != experiment {
                return Err(Error::Config(format!("config file is for `{named}`, not `{experiment}`")));
            }
        }
        let mut params = file.params;
        if let Some(s) = overrides.seeds {
            params.insert("seeds".into(), Value::from(s));
        }
        if let Some(n) = overrides.n {
            params.insert("n".into(), Value::from(n));
        }
        Ok(Self {
            experiment,
            params: experiment.resolve(&params)?,
            output_dir: overrides
                .output_dir
                .clone()
                .or(file.output_dir)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_for_every_experiment() {
        for e in Experiment::ALL {
            let c = ExperimentConfig::defaults(e);
            assert_eq!(c.params.experiment(), e);
            assert_eq!(e.as_str().parse::<Experiment>().unwrap(), e);
        }
        match ExperimentParams::default_for(Experiment::BimodalCut) {
            ExperimentParams::BimodalCut(p) => {
                assert_eq!((p.seeds, p.master_seed, p.n, p.offsets.len()), (20, 42, 100_000, 7));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ConfigFile::from_json(r#"{"experimnet": "oscillating"}"#).is_err());
        let file = ConfigFile::from_json(r#"{"params": {"omega": [1, 2]}}"#).unwrap();
        assert!(ExperimentConfig::resolve(Experiment::Oscillating, file, &Overrides::default()).is_err());
        let o = Overrides { n: Some(100), ..Default::default() };
        assert!(ExperimentConfig::resolve(Experiment::FunctionalSweep, ConfigFile::default(), &o).is_err());
        assert!("no_such_experiment".parse::<Experiment>().is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::from_json(
            r#"{"experiment": "bimodal_nocut", "params": {"seeds": 3, "offsets": [2]}, "output_dir": "a"}"#,
        )
        .unwrap();
        let o = Overrides { seeds: Some(5), output_dir: Some("b".into()), n: None };
        let c = ExperimentConfig::resolve(Experiment::BimodalNocut, file, &o).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("b"));
        match c.params {
            ExperimentParams::BimodalNocut(p) => assert_eq!((p.seeds, p.offsets), (5, vec![2.0])),
            _ => unreachable!(),
        }
        let wrong = ConfigFile::from_json(r#"{"experiment": "oscillating"}"#).unwrap();
        assert!(ExperimentConfig::resolve(Experiment::BimodalCut, wrong, &Overrides::default()).is_err());
    }

    #[test]
    fn preconditions_enforced() {
        let mut m = BTreeMap::new();
        m.insert("offsets".to_string(), serde_json::json!([0.5]));
        assert!(Experiment::BimodalCut.resolve(&m).is_err());
        let mut m = BTreeMap::new();
        m.insert("n".to_string(), serde_json::json!(5000));
        assert!(Experiment::BimodalNocut.resolve(&m).is_err());
    }

    #[test]
    fn print_config_round_trips_params() {
        let c = ExperimentConfig::defaults(Experiment::NeuralBimodal);
        let v: Value = serde_json::from_str(&c.to_json_pretty()).unwrap();
        assert_eq!(v["experiment"], "neural_bimodal");
        assert_eq!(v["params"]["width"], 256);
        let params: BTreeMap<String, Value> = serde_json::from_value(v["params"].clone()).unwrap();
        assert_eq!(Experiment::NeuralBimodal.resolve(&params).unwrap(), c.params);
    }
}

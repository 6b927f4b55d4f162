//! Experiment configuration from flags and an optional TOML file.
//!
//! Both sources fill the same [`ConfigLayer`]. A value present in the file
//! wins over the flag; anything still unset takes the experiment's default.
//! The merged layer is echoed to `<out>/config.toml`.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use clap::Args;
use moe_paging::generators::{
    gen_fixed_partition_adversary, gen_lru_nemesis, gen_yao_random, gen_zipf, starved_layer,
    ZipfParams,
};
use moe_paging::ingest::{parse_moe_trace, round_expand};
use moe_paging::model::read_trace;
use moe_paging::{CacheSize, LayeredTrace, ModelShape, PolicyKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Generate,
    Simulate,
    SweepK,
    Compare,
    GridOptDist,
    SweepZipfA,
    VerifyTheory,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Generate => "generate",
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::SweepK => "sweep-k",
            ExperimentKind::Compare => "compare",
            ExperimentKind::GridOptDist => "grid-opt-dist",
            ExperimentKind::SweepZipfA => "sweep-zipf-a",
            ExperimentKind::VerifyTheory => "verify-theory",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    Zipf,
    Yao,
    Nemesis,
    FixedPartition,
}

impl FromStr for GeneratorKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zipf" => Ok(GeneratorKind::Zipf),
            "yao" => Ok(GeneratorKind::Yao),
            "nemesis" => Ok(GeneratorKind::Nemesis),
            "fixed-partition" => Ok(GeneratorKind::FixedPartition),
            other => bail!("unknown generator {other:?} (expected zipf, yao, nemesis or fixed-partition)"),
        }
    }
}

/// A scalar or a list in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Every field optional; used for flags, the file and the merged echo.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub experiment: Option<ExperimentKind>,
    pub policy: Option<OneOrMany<String>>,
    pub trace: Option<OneOrMany<PathBuf>>,
    pub generator: Option<GeneratorKind>,
    pub n: Option<u32>,
    pub l: Option<u32>,
    pub rounds: Option<u64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub permute: Option<bool>,
    pub z: Option<u32>,
    /// Number of generated traces; trace `i` uses seed `seed + i`.
    pub traces: Option<u32>,
    pub k: Option<OneOrMany<u32>>,
    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
    pub k_step: Option<u32>,
    pub grid_n: Option<Vec<u32>>,
    pub grid_l: Option<Vec<u32>>,
    pub a_values: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub samples: Option<u64>,
    /// Requests discarded before ratio computation; defaults to `n·ℓ`.
    pub warmup: Option<usize>,
    pub partition_threshold: Option<f64>,
}

macro_rules! prefer {
    ($hi:expr, $lo:expr; $($f:ident),*) => {
        ConfigLayer { $($f: $hi.$f.clone().or_else(|| $lo.$f.clone()),)* }
    };
}

impl ConfigLayer {
    /// Field-wise `self` over `lower`.
    pub fn over(&self, lower: &ConfigLayer) -> ConfigLayer {
        prefer!(self, lower; experiment, policy, trace, generator, n, l, rounds, a, b, permute, z,
            traces, k, k_min, k_max, k_step, grid_n, grid_l, a_values, seed, out, samples,
            warmup, partition_threshold)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Built-in defaults for `kind`.
    pub fn defaults(kind: ExperimentKind) -> ConfigLayer {
        let mut d = ConfigLayer {
            experiment: Some(kind),
            policy: Some(OneOrMany::Many(
                PolicyKind::ALL.iter().map(|p| p.name().to_string()).collect(),
            )),
            generator: Some(GeneratorKind::Zipf),
            n: Some(8),
            l: Some(32),
            rounds: Some(2000),
            a: Some(2.0),
            b: Some(0.0),
            permute: Some(false),
            traces: Some(1),
            seed: Some(1),
            out: Some(PathBuf::from("out")),
            samples: Some(100_000),
            partition_threshold: Some(50.0),
            ..ConfigLayer::default()
        };
        match kind {
            ExperimentKind::SweepK => d.a = Some(1.2),
            ExperimentKind::Compare => {
                d.n = Some(16);
                d.a = Some(1.2);
                d.k = Some(OneOrMany::One(200));
                d.traces = Some(10);
            }
            ExperimentKind::GridOptDist => {
                d.k = Some(OneOrMany::One(16));
                d.rounds = Some(1000);
                d.grid_n = Some(vec![2, 4, 8, 16, 32]);
                d.grid_l = Some(vec![2, 4, 8, 16, 32]);
            }
            ExperimentKind::SweepZipfA => {
                d.k = Some(OneOrMany::One(64));
                d.rounds = Some(1000);
                d.a_values = Some(vec![0.01, 0.1, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 50.0]);
            }
            // "-" is stdout
            ExperimentKind::Generate => d.out = Some(PathBuf::from("-")),
            ExperimentKind::Simulate | ExperimentKind::VerifyTheory => {}
        }
        d
    }
}

/// Flags shared by the experiment subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML config file; its values override flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trace file (canonical text or .jsonl); repeatable.
    #[arg(long)]
    pub trace: Vec<PathBuf>,
    /// Policy name; repeatable.
    #[arg(long)]
    pub policy: Vec<String>,
    /// Cache size; repeatable.
    #[arg(long)]
    pub k: Vec<u32>,
    #[arg(long)]
    pub k_min: Option<u32>,
    #[arg(long)]
    pub k_max: Option<u32>,
    #[arg(long)]
    pub k_step: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Generator used when no trace file is given.
    #[arg(long)]
    pub generator: Option<GeneratorKind>,
    /// Experts per layer.
    #[arg(long)]
    pub n: Option<u32>,
    /// Layers.
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Zipf exponent.
    #[arg(long)]
    pub a: Option<f64>,
    /// Zipf offset.
    #[arg(long)]
    pub b: Option<f64>,
    /// Shuffle expert popularity independently per layer.
    #[arg(long)]
    pub permute: bool,
    /// Targeted layer of the fixed-partition adversary.
    #[arg(long)]
    pub z: Option<u32>,
    /// Number of generated traces.
    #[arg(long)]
    pub traces: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    pub grid_n: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    pub grid_l: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    pub a_values: Vec<f64>,
    /// Monte Carlo samples.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Requests discarded before computing ratios.
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub partition_threshold: Option<f64>,
}

fn need<T>(value: Option<T>, name: &str) -> Result<T> {
    value.ok_or_else(|| anyhow!("missing {name}"))
}

fn non_empty<T>(v: Vec<T>) -> Option<Vec<T>> {
    (!v.is_empty()).then_some(v)
}

impl CommonArgs {
    pub fn to_layer(&self) -> ConfigLayer {
        ConfigLayer {
            experiment: None,
            policy: non_empty(self.policy.clone()).map(OneOrMany::Many),
            trace: non_empty(self.trace.clone()).map(OneOrMany::Many),
            generator: self.generator,
            n: self.n,
            l: self.l,
            rounds: self.rounds,
            a: self.a,
            b: self.b,
            permute: self.permute.then_some(true),
            z: self.z,
            traces: self.traces,
            k: non_empty(self.k.clone()).map(OneOrMany::Many),
            k_min: self.k_min,
            k_max: self.k_max,
            k_step: self.k_step,
            grid_n: non_empty(self.grid_n.clone()),
            grid_l: non_empty(self.grid_l.clone()),
            a_values: non_empty(self.a_values.clone()),
            seed: self.seed,
            out: self.out.clone(),
            samples: self.samples,
            warmup: self.warmup,
            partition_threshold: self.partition_threshold,
        }
    }
}

/// Generator and its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub shape: ModelShape,
    pub rounds: u64,
    pub zipf: ZipfParams,
    /// Cache size for the adversarial generators.
    pub k: Option<CacheSize>,
    pub z: Option<u32>,
}

impl GeneratorSpec {
    pub fn trace_id(&self, seed: u64) -> String {
        let (n, l) = (self.shape.experts(), self.shape.layers());
        match self.kind {
            GeneratorKind::Zipf => format!("zipf-n{n}-l{l}-a{}-s{seed}", self.zipf.a),
            GeneratorKind::Yao => format!("yao-n{n}-l{l}-s{seed}"),
            GeneratorKind::Nemesis => format!("nemesis-n{n}-l{l}"),
            GeneratorKind::FixedPartition => format!("fixed-partition-n{n}-l{l}"),
        }
    }

    /// One-line description for trace file headers.
    pub fn describe(&self, seed: u64) -> String {
        let (n, l, r) = (self.shape.experts(), self.shape.layers(), self.rounds);
        match self.kind {
            GeneratorKind::Zipf => format!(
                "generator=zipf n={n} l={l} rounds={r} a={} b={} permute={} seed={seed}",
                self.zipf.a, self.zipf.b, self.zipf.per_layer_permutation
            ),
            GeneratorKind::Yao => format!("generator=yao n={n} l={l} rounds={r} seed={seed}"),
            GeneratorKind::Nemesis => format!(
                "generator=nemesis k={} l={l} rounds={r} seed={seed}",
                self.k.map_or(0, CacheSize::get)
            ),
            GeneratorKind::FixedPartition => format!(
                "generator=fixed-partition n={n} l={l} z={} rounds={r} k={} seed={seed}",
                self.z.unwrap_or(0),
                self.k.map_or(0, CacheSize::get)
            ),
        }
    }

    pub fn generate(&self, seed: u64) -> Result<LayeredTrace> {
        let (n, l) = (self.shape.experts(), self.shape.layers());
        let need_k = || self.k.ok_or_else(|| anyhow!("{:?} generator needs k", self.kind));
        Ok(match self.kind {
            GeneratorKind::Zipf => gen_zipf(self.shape, &self.zipf, self.rounds, seed)?,
            GeneratorKind::Yao => gen_yao_random(n, l, self.rounds, seed)?,
            GeneratorKind::Nemesis => gen_lru_nemesis(need_k()?, l)?.trace(self.rounds),
            GeneratorKind::FixedPartition => {
                let k = need_k()?;
                let z = self
                    .z
                    .or_else(|| starved_layer(k, l, n))
                    .ok_or_else(|| anyhow!("no layer is starved with k={k}, n={n}, l={l}"))?;
                gen_fixed_partition_adversary(n, l, z, self.rounds, k)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceSource {
    Files(Vec<PathBuf>),
    Generated { spec: GeneratorSpec, count: u32 },
}

/// A trace with a stable identifier for result rows.
#[derive(Debug, Clone)]
pub struct NamedTrace {
    pub id: String,
    pub trace: LayeredTrace,
}

/// Reads a canonical trace file, or a `.jsonl` record file which is
/// round-expanded.
pub fn load_trace(path: &Path) -> Result<LayeredTrace> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let reader = BufReader::new(file);
    if path.extension().is_some_and(|e| e == "jsonl") {
        let raw = parse_moe_trace(reader).with_context(|| format!("ingesting {}", path.display()))?;
        Ok(round_expand(&raw))
    } else {
        read_trace(reader).with_context(|| format!("reading {}", path.display()))
    }
}

impl TraceSource {
    pub fn load(&self, seed: u64) -> Result<Vec<NamedTrace>> {
        match self {
            TraceSource::Files(paths) => paths
                .iter()
                .map(|p| {
                    let id = p
                        .file_stem()
                        .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
                    Ok(NamedTrace { id, trace: load_trace(p)? })
                })
                .collect(),
            TraceSource::Generated { spec, count } => (0..u64::from(*count))
                .map(|i| {
                    Ok(NamedTrace {
                        id: spec.trace_id(seed + i),
                        trace: spec.generate(seed + i)?,
                    })
                })
                .collect(),
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub policies: Vec<PolicyKind>,
    pub source: TraceSource,
    /// Explicit cache sizes; empty means "derive from the range or trace".
    pub k: Vec<u32>,
    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
    pub k_step: u32,
    pub grid_n: Vec<u32>,
    pub grid_l: Vec<u32>,
    pub a_values: Vec<f64>,
    pub generator: GeneratorSpec,
    pub seed: u64,
    pub out: PathBuf,
    pub samples: u64,
    pub warmup: Option<usize>,
    pub partition_threshold: f64,
    /// Merged layer, echoed to the output directory.
    pub merged: ConfigLayer,
}

impl ExperimentConfig {
    /// Merges file over flags over defaults and validates the result.
    pub fn resolve(kind: ExperimentKind, flags: &ConfigLayer, file: Option<&ConfigLayer>) -> Result<Self> {
        if let Some(f) = file {
            if let Some(k) = f.experiment {
                ensure!(
                    k == kind,
                    "config file is for experiment {:?} but {:?} was invoked",
                    k.name(),
                    kind.name()
                );
            }
        }
        let user = match file {
            Some(f) => f.over(flags),
            None => flags.clone(),
        };
        let merged = user.over(&ConfigLayer::defaults(kind));

        let policies = need(merged.policy.as_ref(), "policy")?
            .to_vec()
            .iter()
            .map(|p| p.parse::<PolicyKind>().map_err(|e| anyhow!("{e}")))
            .collect::<Result<Vec<_>>>()?;
        ensure!(!policies.is_empty(), "policy list is empty");

        let k = merged.k.as_ref().map(OneOrMany::to_vec).unwrap_or_default();
        ensure!(k.iter().all(|&k| k >= 1), "k values must be >= 1");
        for (name, v) in [("k_min", merged.k_min), ("k_max", merged.k_max), ("k_step", merged.k_step)] {
            ensure!(v != Some(0), "{name} must be >= 1");
        }

        let n = need(merged.n, "n")?;
        let l = need(merged.l, "l")?;
        let shape = ModelShape::new(n, l)?;
        let rounds = need(merged.rounds, "rounds")?;
        ensure!(rounds >= 1, "rounds must be >= 1");
        let zipf = ZipfParams::new(
            need(merged.a, "a")?,
            need(merged.b, "b")?,
            merged.permute.unwrap_or(false),
        )?;
        let generator = GeneratorSpec {
            kind: need(merged.generator, "generator")?,
            shape,
            rounds,
            zipf,
            k: k.first().map(|&k| CacheSize::new(k)).transpose()?,
            z: merged.z,
        };

        let files = merged.trace.as_ref().map(OneOrMany::to_vec).unwrap_or_default();
        let count = need(merged.traces, "traces")?;
        let source = if files.is_empty() {
            ensure!(count >= 1, "traces must be >= 1");
            TraceSource::Generated { spec: generator.clone(), count }
        } else {
            TraceSource::Files(files)
        };

        let grid_n = merged.grid_n.clone().unwrap_or_default();
        let grid_l = merged.grid_l.clone().unwrap_or_default();
        let a_values = merged.a_values.clone().unwrap_or_default();
        match kind {
            ExperimentKind::GridOptDist => {
                ensure!(!grid_n.is_empty() && !grid_l.is_empty(), "grid axes must be non-empty");
                ensure!(grid_n.iter().chain(&grid_l).all(|&v| v >= 1), "grid values must be >= 1");
                ensure!(k.len() == 1, "grid-opt-dist needs exactly one k");
            }
            ExperimentKind::SweepZipfA => {
                ensure!(!a_values.is_empty(), "a_values must be non-empty");
                ensure!(k.len() == 1, "sweep-zipf-a needs exactly one k");
                for &a in &a_values {
                    ZipfParams::new(a, zipf.b, zipf.per_layer_permutation)?;
                }
            }
            ExperimentKind::Compare => ensure!(k.len() == 1, "compare needs exactly one k"),
            ExperimentKind::Simulate => ensure!(!k.is_empty(), "simulate needs --k"),
            ExperimentKind::Generate | ExperimentKind::SweepK | ExperimentKind::VerifyTheory => {}
        }

        let samples = need(merged.samples, "samples")?;
        ensure!(samples >= 1, "samples must be >= 1");
        Ok(Self {
            kind,
            policies,
            source,
            k,
            k_min: merged.k_min,
            k_max: merged.k_max,
            k_step: merged.k_step.unwrap_or(1),
            grid_n,
            grid_l,
            a_values,
            generator,
            seed: need(merged.seed, "seed")?,
            out: need(merged.out.clone(), "out")?,
            samples,
            warmup: merged.warmup,
            partition_threshold: need(merged.partition_threshold, "partition_threshold")?,
            merged,
        })
    }

    /// Resolves from parsed flags, reading `--config` if given.
    pub fn from_args(kind: ExperimentKind, args: &CommonArgs) -> Result<Self> {
        let file = args.config.as_deref().map(ConfigLayer::from_toml_file).transpose()?;
        Self::resolve(kind, &args.to_layer(), file.as_ref())
    }

    /// Defaults for `kind` with no user input.
    pub fn default_for(kind: ExperimentKind) -> Result<Self> {
        Self::resolve(kind, &ConfigLayer::default(), None)
    }

    pub fn k_single(&self) -> Result<CacheSize> {
        let k = *self.k.first().ok_or_else(|| anyhow!("k is required"))?;
        Ok(CacheSize::new(k)?)
    }

    /// Cache sizes for a sweep over a trace of shape `shape`.
    pub fn k_values(&self, shape: ModelShape) -> Result<Vec<u32>> {
        let max = u32::try_from(shape.page_count()).unwrap_or(u32::MAX);
        let ks = if self.k.is_empty() {
            let lo = self.k_min.unwrap_or(1);
            let hi = self.k_max.unwrap_or(max);
            (lo..=hi).step_by(self.k_step as usize).collect()
        } else {
            self.k.clone()
        };
        ensure!(!ks.is_empty(), "empty k range");
        if let Some(bad) = ks.iter().find(|&&k| k == 0 || k > max) {
            bail!("k={bad} outside [1, n*l = {max}]");
        }
        Ok(ks)
    }

    /// Creates the output directory and writes `config.toml` into it.
    pub fn prepare_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let text = toml::to_string(&self.merged).context("encoding config")?;
        fs::write(self.out.join("config.toml"), text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_wins_over_flags() {
        let flags = ConfigLayer {
            seed: Some(5),
            n: Some(4),
            ..Default::default()
        };
        let file: ConfigLayer = toml::from_str("seed = 9\nk = 12\npolicy = \"lru\"\n").unwrap();
        let cfg = ExperimentConfig::resolve(ExperimentKind::Compare, &flags, Some(&file)).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.generator.shape.experts(), 4);
        assert_eq!(cfg.k, vec![12]);
        assert_eq!(cfg.policies, vec![PolicyKind::Lru]);
    }

    #[test]
    fn rejects_bad_input() {
        let bad_policy = ConfigLayer {
            policy: Some(OneOrMany::One("fifo".into())),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(ExperimentKind::SweepK, &bad_policy, None).is_err());
        let zero_k = ConfigLayer {
            k: Some(OneOrMany::One(0)),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(ExperimentKind::SweepK, &zero_k, None).is_err());
        let empty_grid = ConfigLayer {
            grid_n: Some(vec![]),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(ExperimentKind::GridOptDist, &empty_grid, None).is_err());
        assert!(toml::from_str::<ConfigLayer>("bogus = 1").is_err());
        let other: ConfigLayer = toml::from_str("experiment = \"compare\"").unwrap();
        assert!(
            ExperimentConfig::resolve(ExperimentKind::SweepK, &ConfigLayer::default(), Some(&other))
                .is_err()
        );
    }

    #[test]
    fn merged_config_round_trips_through_toml() {
        let cfg = ExperimentConfig::default_for(ExperimentKind::GridOptDist).unwrap();
        let text = toml::to_string(&cfg.merged).unwrap();
        let back: ConfigLayer = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg.merged);
    }

    #[test]
    fn k_range_defaults_to_full_sweep() {
        let cfg = ExperimentConfig::default_for(ExperimentKind::SweepK).unwrap();
        let shape = ModelShape::new(2, 3).unwrap();
        assert_eq!(cfg.k_values(shape).unwrap(), vec![1, 2, 3, 4, 5, 6]);
        let mut cfg = cfg;
        cfg.k = vec![7];
        assert!(cfg.k_values(shape).is_err());
    }
}

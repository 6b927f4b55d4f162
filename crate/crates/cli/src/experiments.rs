//! Experiment drivers. Each returns its data; `emit` writes the CSV and SVG
//! artifacts into the configured output directory.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use moe_paging::generators::{
    coupon_cover_time, cover_time_lower_bound, gen_adaptive_adversary,
    gen_fixed_partition_adversary, gen_lru_nemesis, gen_yao_random, harmonic, starved_layer,
    ZipfParams,
};
use moe_paging::offline::{belady_simulate, dp_opt, OracleCap};
use moe_paging::policies::{split_capacity, Lru};
use moe_paging::{CacheSize, LayeredTrace, ModelShape, PolicyKind, SimResult};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, GeneratorSpec, NamedTrace};
use crate::svg;
use crate::table::{write_csv, BoxSummary, ResultRow, ResultTable};

/// `faults / opt`, with 0/0 read as 1.
pub fn normalized(faults: u64, opt: u64) -> f64 {
    if opt == 0 {
        if faults == 0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        faults as f64 / opt as f64
    }
}

fn timed_run(policy: PolicyKind, trace: &NamedTrace, k: u32, seed: u64) -> Result<ResultRow> {
    let start = Instant::now();
    let result = policy
        .run(&trace.trace, CacheSize::new(k)?, seed)
        .with_context(|| format!("{policy} on {} with k={k}", trace.id))?;
    Ok(ResultRow {
        trace_id: trace.id.clone(),
        policy: policy.name().to_string(),
        k,
        faults: result.faults,
        normalized: None,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Fills `normalized` for rows whose (trace, k) has an `opt` row.
fn attach_normalized(table: &mut ResultTable) {
    let opt: BTreeMap<(String, u32), u64> = table
        .rows
        .iter()
        .filter(|r| r.policy == PolicyKind::Opt.name())
        .map(|r| ((r.trace_id.clone(), r.k), r.faults))
        .collect();
    for row in &mut table.rows {
        row.normalized = opt
            .get(&(row.trace_id.clone(), row.k))
            .map(|&o| normalized(row.faults, o));
    }
}

fn write_results(table: &ResultTable, out: &Path) -> Result<()> {
    table.write_csv(&out.join("results.csv"))?;
    table.write_timings(&out.join("timings.csv"))
}

/// Runs `policies` over every trace at every `k` in `ks`.
pub fn simulate_all(
    traces: &[NamedTrace],
    policies: &[PolicyKind],
    ks: &[u32],
    seed: u64,
) -> Result<ResultTable> {
    let jobs: Vec<(usize, PolicyKind, u32)> = (0..traces.len())
        .flat_map(|i| {
            policies
                .iter()
                .flat_map(move |&p| ks.iter().map(move |&k| (i, p, k)))
        })
        .collect();
    run_jobs(traces, &jobs, seed)
}

fn run_jobs(traces: &[NamedTrace], jobs: &[(usize, PolicyKind, u32)], seed: u64) -> Result<ResultTable> {
    let rows = jobs
        .par_iter()
        .map(|&(i, p, k)| timed_run(p, &traces[i], k, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable { rows };
    attach_normalized(&mut table);
    table.sort();
    Ok(table)
}

/// A k at which a policy faulted more than at the previous, smaller k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultIncrease {
    pub trace_id: String,
    pub policy: String,
    pub k_prev: u32,
    pub k: u32,
    pub faults_prev: u64,
    pub faults: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub policy: String,
    pub k: u32,
    pub faults: u64,
}

#[derive(Debug, Clone)]
pub struct SweepK {
    pub table: ResultTable,
    pub increases: Vec<FaultIncrease>,
}

impl SweepK {
    /// Largest single-step fault increase of `policy` on `trace_id`; 0 for a
    /// non-increasing curve.
    pub fn max_step_increase(&self, trace_id: &str, policy: &str) -> u64 {
        self.increases
            .iter()
            .filter(|d| d.trace_id == trace_id && d.policy == policy)
            .map(|d| d.faults - d.faults_prev)
            .max()
            .unwrap_or(0)
    }

    pub fn curve(&self, trace_id: &str) -> Vec<CurvePoint> {
        self.table
            .rows
            .iter()
            .filter(|r| r.trace_id == trace_id)
            .map(|r| CurvePoint {
                policy: r.policy.clone(),
                k: r.k,
                faults: r.faults,
            })
            .collect()
    }

    pub fn emit(&self, out: &Path) -> Result<()> {
        write_results(&self.table, out)?;
        write_csv(&out.join("nonmonotone.csv"), "moe-paging-nonmonotone/1", &self.increases)?;
        let mut ids: Vec<&str> = self.table.rows.iter().map(|r| r.trace_id.as_str()).collect();
        ids.dedup();
        for id in ids {
            let curve = self.curve(id);
            write_csv(&out.join(format!("sweep_k-{id}.csv")), "moe-paging-sweep-k/1", &curve)?;
            let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            for p in &curve {
                if series.last().is_none_or(|(name, _)| *name != p.policy) {
                    series.push((p.policy.clone(), Vec::new()));
                }
                series.last_mut().unwrap().1.push((f64::from(p.k), p.faults as f64));
            }
            let chart = svg::line_chart(&format!("faults vs k ({id})"), "k", "faults", &series);
            std::fs::write(out.join(format!("sweep_k-{id}.svg")), chart)?;
        }
        Ok(())
    }
}

/// Faults versus cache size for every policy on every trace.
pub fn sweep_k(cfg: &ExperimentConfig) -> Result<SweepK> {
    let traces = cfg.source.load(cfg.seed)?;
    ensure!(!traces.is_empty(), "no traces");
    let mut per_trace = Vec::new();
    for t in &traces {
        per_trace.push(cfg.k_values(t.trace.shape())?);
    }
    // split policies are undefined below one slot per layer
    let mut jobs = Vec::new();
    for (i, (t, ks)) in traces.iter().zip(&per_trace).enumerate() {
        let layers = t.trace.shape().layers();
        for &p in &cfg.policies {
            for &k in ks {
                if !(p.is_split() && k < layers) {
                    jobs.push((i, p, k));
                }
            }
        }
    }
    let table = run_jobs(&traces, &jobs, cfg.seed)?;
    let mut increases = Vec::new();
    for pair in table.rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.trace_id == b.trace_id && a.policy == b.policy && b.faults > a.faults {
            increases.push(FaultIncrease {
                trace_id: b.trace_id.clone(),
                policy: b.policy.clone(),
                k_prev: a.k,
                k: b.k,
                faults_prev: a.faults,
                faults: b.faults,
            });
        }
    }
    Ok(SweepK { table, increases })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl PolicySummary {
    fn new(policy: &str, s: BoxSummary) -> Self {
        Self {
            policy: policy.to_string(),
            count: s.count,
            min: s.min,
            q1: s.q1,
            median: s.median,
            q3: s.q3,
            max: s.max,
        }
    }

    pub fn summary(&self) -> BoxSummary {
        BoxSummary {
            count: self.count,
            min: self.min,
            q1: self.q1,
            median: self.median,
            q3: self.q3,
            max: self.max,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub table: ResultTable,
    pub summaries: Vec<PolicySummary>,
}

impl Comparison {
    pub fn summary(&self, policy: PolicyKind) -> Option<BoxSummary> {
        self.summaries
            .iter()
            .find(|s| s.policy == policy.name())
            .map(PolicySummary::summary)
    }

    pub fn emit(&self, out: &Path) -> Result<()> {
        write_results(&self.table, out)?;
        write_csv(&out.join("compare.csv"), "moe-paging-compare/1", &self.summaries)?;
        let groups: Vec<(String, BoxSummary)> = self
            .summaries
            .iter()
            .map(|s| (s.policy.clone(), s.summary()))
            .collect();
        let chart = svg::box_plot("normalized faults", "faults / OPT faults", &groups);
        std::fs::write(out.join("compare.svg"), chart)?;
        Ok(())
    }
}

/// Faults normalized by Belady's on each trace at one k, summarized per
/// policy.
pub fn compare_normalized(cfg: &ExperimentConfig) -> Result<Comparison> {
    let traces = cfg.source.load(cfg.seed)?;
    ensure!(!traces.is_empty(), "no traces");
    let k = cfg.k_single()?;
    let mut policies = cfg.policies.clone();
    if !policies.contains(&PolicyKind::Opt) {
        policies.push(PolicyKind::Opt);
    }
    let mut table = simulate_all(&traces, &policies, &[k.get()], cfg.seed)?;
    if !cfg.policies.contains(&PolicyKind::Opt) {
        table.rows.retain(|r| r.policy != PolicyKind::Opt.name());
    }
    let mut summaries = Vec::new();
    for p in &cfg.policies {
        let values: Vec<f64> = table
            .rows
            .iter()
            .filter(|r| r.policy == p.name())
            .filter_map(|r| r.normalized)
            .collect();
        if let Some(summary) = BoxSummary::from_values(&values) {
            summaries.push(PolicySummary::new(p.name(), summary));
        }
    }
    summaries.sort_by(|a, b| a.policy.cmp(&b.policy));
    Ok(Comparison { table, summaries })
}

/// OPT-Dist against OPT on one Zipf trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistCell {
    pub n: u32,
    pub l: u32,
    pub a: f64,
    pub k: u32,
    /// Every page fits and every layer's share holds all its experts.
    pub all_fits: bool,
    pub opt: Option<u64>,
    pub opt_dist: Option<u64>,
    /// `None` when `k < ℓ` makes the split cache inapplicable.
    pub ratio: Option<f64>,
}

fn dist_cell(spec: &GeneratorSpec, k: CacheSize, seed: u64) -> Result<(DistCell, Vec<ResultRow>)> {
    let (n, l) = (spec.shape.experts(), spec.shape.layers());
    let mut cell = DistCell {
        n,
        l,
        a: spec.zipf.a,
        k: k.get(),
        all_fits: false,
        opt: None,
        opt_dist: None,
        ratio: None,
    };
    let Ok(caps) = split_capacity(k, l) else {
        return Ok((cell, Vec::new()));
    };
    cell.all_fits = spec.shape.page_count() <= u64::from(k.get()) && caps.iter().all(|&c| c >= n);
    let trace = NamedTrace {
        id: spec.trace_id(seed),
        trace: spec.generate(seed)?,
    };
    let opt = timed_run(PolicyKind::Opt, &trace, k.get(), seed)?;
    let mut dist = timed_run(PolicyKind::OptDist, &trace, k.get(), seed)?;
    let ratio = normalized(dist.faults, opt.faults);
    dist.normalized = Some(ratio);
    cell.opt = Some(opt.faults);
    cell.opt_dist = Some(dist.faults);
    cell.ratio = Some(ratio);
    let mut opt = opt;
    opt.normalized = Some(1.0);
    Ok((cell, vec![opt, dist]))
}

#[derive(Debug, Clone)]
pub struct DistGrid {
    pub table: ResultTable,
    pub cells: Vec<DistCell>,
}

impl DistGrid {
    pub fn cell(&self, n: u32, l: u32) -> Option<&DistCell> {
        self.cells.iter().find(|c| c.n == n && c.l == l)
    }

    pub fn emit(&self, out: &Path) -> Result<()> {
        write_results(&self.table, out)?;
        write_csv(&out.join("grid.csv"), "moe-paging-grid/1", &self.cells)?;
        let mut ns: Vec<u32> = self.cells.iter().map(|c| c.n).collect();
        let mut ls: Vec<u32> = self.cells.iter().map(|c| c.l).collect();
        ns.sort_unstable();
        ns.dedup();
        ls.sort_unstable();
        ls.dedup();
        let values: Vec<Vec<Option<f64>>> = ls
            .iter()
            .map(|&l| ns.iter().map(|&n| self.cell(n, l).and_then(|c| c.ratio)).collect())
            .collect();
        let k = self.cells.first().map_or(0, |c| c.k);
        let chart = svg::heatmap(
            &format!("OPT-Dist / OPT faults, k={k}"),
            "layers l",
            "experts n",
            &ls.iter().map(u32::to_string).collect::<Vec<_>>(),
            &ns.iter().map(u32::to_string).collect::<Vec<_>>(),
            &values,
        );
        std::fs::write(out.join("grid.svg"), chart)?;
        Ok(())
    }
}

fn collect_cells(jobs: Vec<GeneratorSpec>, k: CacheSize, seed: u64) -> Result<(ResultTable, Vec<DistCell>)> {
    let parts = jobs
        .par_iter()
        .map(|spec| dist_cell(spec, k, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable::default();
    let mut cells = Vec::new();
    for (cell, rows) in parts {
        cells.push(cell);
        table.rows.extend(rows);
    }
    table.sort();
    Ok((table, cells))
}

/// OPT-Dist/OPT over a grid of (n, ℓ) at fixed k. Cells with `k < ℓ` are
/// reported as not applicable.
pub fn grid_opt_vs_dist(cfg: &ExperimentConfig) -> Result<DistGrid> {
    let k = cfg.k_single()?;
    let mut jobs = Vec::new();
    for &l in &cfg.grid_l {
        for &n in &cfg.grid_n {
            let mut spec = cfg.generator.clone();
            spec.shape = ModelShape::new(n, l)?;
            jobs.push(spec);
        }
    }
    let (table, cells) = collect_cells(jobs, k, cfg.seed)?;
    Ok(DistGrid { table, cells })
}

#[derive(Debug, Clone)]
pub struct ZipfSweep {
    pub table: ResultTable,
    pub points: Vec<DistCell>,
}

#[derive(Serialize)]
struct ZipfPlotRow {
    a: f64,
    log10_a: f64,
    ratio: Option<f64>,
}

impl ZipfSweep {
    pub fn at(&self, a: f64) -> Option<&DistCell> {
        self.points.iter().find(|p| p.a == a)
    }

    pub fn emit(&self, out: &Path) -> Result<()> {
        write_results(&self.table, out)?;
        write_csv(&out.join("sweep_zipf_a.csv"), "moe-paging-sweep-zipf-a/1", &self.points)?;
        let plot: Vec<ZipfPlotRow> = self
            .points
            .iter()
            .map(|p| ZipfPlotRow {
                a: p.a,
                log10_a: p.a.log10(),
                ratio: p.ratio,
            })
            .collect();
        write_csv(&out.join("sweep_zipf_a-plot.csv"), "moe-paging-sweep-zipf-a-plot/1", &plot)?;
        let series = vec![(
            "opt-dist / opt".to_string(),
            plot.iter()
                .filter_map(|p| p.ratio.map(|r| (p.log10_a, r)))
                .collect(),
        )];
        let chart = svg::line_chart("OPT-Dist / OPT vs Zipf exponent", "log10 a", "ratio", &series);
        std::fs::write(out.join("sweep_zipf_a.svg"), chart)?;
        Ok(())
    }
}

/// OPT-Dist/OPT as the Zipf exponent varies, at fixed (n, ℓ, k).
pub fn sweep_zipf_a(cfg: &ExperimentConfig) -> Result<ZipfSweep> {
    let k = cfg.k_single()?;
    let mut jobs = Vec::new();
    for &a in &cfg.a_values {
        let mut spec = cfg.generator.clone();
        spec.zipf = ZipfParams::new(a, spec.zipf.b, spec.zipf.per_layer_permutation)?;
        jobs.push(spec);
    }
    let (table, mut points) = collect_cells(jobs, k, cfg.seed)?;
    points.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(ZipfSweep { table, points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub criterion: String,
    pub measured: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl TheoryReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn emit(&self, out: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(out.join("report.json"), text + "\n")?;
        Ok(())
    }
}

fn warmup_or(cfg: &ExperimentConfig, shape: ModelShape) -> usize {
    cfg.warmup.unwrap_or(shape.page_count() as usize)
}

/// Fixed-partition adversary at n=2, ℓ=2, k=3. Belady settles after its
/// compulsory misses, so the ratio uses whole-run totals.
pub fn check_fixed_partition(cfg: &ExperimentConfig, rounds: u64) -> Result<Check> {
    let (n, l, k) = (2, 2, CacheSize::new(3)?);
    let z = starved_layer(k, l, n).context("no starved layer")?;
    let trace = gen_fixed_partition_adversary(n, l, z, rounds, k)?;
    let warmup = warmup_or(cfg, trace.shape());
    let dist = PolicyKind::LruDist.run(&trace, k, cfg.seed)?;
    let opt = belady_simulate(&trace, k);
    let ratio = normalized(dist.faults, opt.faults);
    Ok(Check {
        name: "fixed-partition".into(),
        passed: ratio > cfg.partition_threshold,
        criterion: format!(
            "fixed-partition adversary (n={n}, l={l}, k={k}, z={z}, {rounds} rounds): lru-dist faults / opt faults > {}",
            cfg.partition_threshold
        ),
        measured: serde_json::json!({
            "lru_dist_faults": dist.faults,
            "opt_faults": opt.faults,
            "opt_faults_after_warmup": opt.faults_after(warmup),
            "warmup_requests": warmup,
            "ratio": ratio,
        }),
    })
}

/// Adaptive adversary against LRU at n=2, ℓ=2, k=3.
pub fn check_adaptive(cfg: &ExperimentConfig, rounds: u64) -> Result<Check> {
    let (n, l) = (2, 2);
    let run = gen_adaptive_adversary(Lru::new(), n, l, rounds)?;
    let k = n * l - 1;
    let warmup = cfg.warmup.unwrap_or(run.warmup_requests());
    let opt = belady_simulate(&run.trace, CacheSize::new(k)?);
    let policy_faults = run.result.faults_after(warmup);
    let opt_faults = opt.faults_after(warmup);
    let ratio = normalized(policy_faults, opt_faults);
    let bound = f64::from(k - l + 1);
    Ok(Check {
        name: "adaptive-adversary".into(),
        passed: ratio >= 0.9 * bound,
        criterion: format!(
            "adaptive adversary vs lru (n={n}, l={l}, k={k}, {rounds} rounds): lru/opt faults after warmup >= 0.9*(k-l+1) = {}",
            0.9 * bound
        ),
        measured: serde_json::json!({
            "lru_faults_adversarial": run.adversarial_faults_per_round().iter().sum::<u64>(),
            "lru_faults_after_warmup": policy_faults,
            "opt_faults": opt.faults,
            "opt_faults_after_warmup": opt_faults,
            "warmup_requests": warmup,
            "ratio": ratio,
        }),
    })
}

/// Cyclic nemesis against LRU at k=5, ℓ=2.
pub fn check_nemesis(cfg: &ExperimentConfig, requests: u64) -> Result<Check> {
    let (k, l) = (CacheSize::new(5)?, 2);
    let nemesis = gen_lru_nemesis(k, l)?;
    let trace = nemesis.trace(requests / u64::from(l));
    let warmup = warmup_or(cfg, trace.shape());
    let lru = PolicyKind::Lru.run(&trace, k, cfg.seed)?;
    let opt = belady_simulate(&trace, k);
    let ratio = normalized(lru.faults_after(warmup), opt.faults_after(warmup));
    let bound = f64::from(k.get());
    Ok(Check {
        name: "lru-nemesis".into(),
        passed: ratio >= 0.9 * bound,
        criterion: format!(
            "lru nemesis (k={k}, l={l}, {} requests): lru/opt faults after warmup >= 0.9*k = {}",
            trace.len(),
            0.9 * bound
        ),
        measured: serde_json::json!({
            "lru_faults": lru.faults,
            "lru_faults_after_warmup": lru.faults_after(warmup),
            "opt_faults": opt.faults,
            "opt_faults_after_warmup": opt.faults_after(warmup),
            "warmup_requests": warmup,
            "ratio": ratio,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverPoint {
    pub coupons: u32,
    pub collectors: u32,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    pub dominates: bool,
}

/// Monte Carlo cover times against `max(N·H_N, ln C / 6)`. At C = 1 the
/// bound is the exact expectation, so a mean within three standard errors
/// below it still counts as dominating.
pub fn check_cover_times(cfg: &ExperimentConfig, grid_n: &[u32], grid_c: &[u32]) -> Result<Vec<Check>> {
    let mut points = Vec::new();
    for &n in grid_n {
        for &c in grid_c {
            let e = coupon_cover_time(n, c, cfg.samples, cfg.seed)?;
            let bound = cover_time_lower_bound(n, c);
            points.push(CoverPoint {
                coupons: n,
                collectors: c,
                mean: e.mean,
                stderr: e.stderr,
                bound,
                dominates: e.mean + 3.0 * e.stderr >= bound,
            });
        }
    }
    let classical = coupon_cover_time(4, 1, cfg.samples, cfg.seed)?;
    let expected = 4.0 * harmonic(4);
    let rel = (classical.mean - expected).abs() / expected;
    Ok(vec![
        Check {
            name: "cover-time-bound".into(),
            passed: points.iter().all(|p| p.dominates),
            criterion: format!(
                "cover-time mean + 3*stderr >= max(N*H_N, ln C/6) with {} samples per cell",
                cfg.samples
            ),
            measured: serde_json::to_value(&points)?,
        },
        Check {
            name: "cover-time-classical".into(),
            passed: rel <= 0.02,
            criterion: "mean cover time at N=4, C=1 within 2% of 25/3".into(),
            measured: serde_json::json!({
                "mean": classical.mean,
                "stderr": classical.stderr,
                "expected": expected,
                "relative_error": rel,
            }),
        },
    ])
}

/// Small random instance number `i` of the oracle cross-check.
pub fn oracle_instance(i: u64) -> Result<(LayeredTrace, CacheSize)> {
    let n = 1 + (i % 3) as u32;
    let l = 1 + ((i / 3) % 3) as u32;
    let k = 1 + ((i / 9) % 4) as u32;
    let max_rounds = 16 / u64::from(l);
    let rounds = 1 + (i.wrapping_mul(7) % max_rounds);
    Ok((gen_yao_random(n, l, rounds, i)?, CacheSize::new(k)?))
}

/// Belady against the exhaustive oracle on `count` small instances.
pub fn check_oracle(count: u64) -> Result<Check> {
    let mut mismatches = Vec::new();
    for i in 0..count {
        let (trace, k) = oracle_instance(i)?;
        let belady = belady_simulate(&trace, k).faults;
        let exact = dp_opt(&trace, k, OracleCap::default())?;
        if belady != exact {
            mismatches.push(serde_json::json!({"instance": i, "belady": belady, "exact": exact}));
        }
    }
    Ok(Check {
        name: "oracle".into(),
        passed: mismatches.is_empty(),
        criterion: format!("belady faults equal exhaustive optimum on {count} instances with n, l <= 3, k <= 4, length <= 16"),
        measured: serde_json::json!({ "instances": count, "mismatches": mismatches }),
    })
}

/// Every lower-bound and oracle check at its standard instance size.
pub fn verify_theory(cfg: &ExperimentConfig) -> Result<TheoryReport> {
    let mut checks = vec![
        check_oracle(100)?,
        check_fixed_partition(cfg, 10_000)?,
        check_adaptive(cfg, 2_000)?,
        check_nemesis(cfg, 10_000)?,
    ];
    checks.extend(check_cover_times(cfg, &[2, 4, 8], &[1, 4, 16, 64])?);
    Ok(TheoryReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Per-run summary printed by `simulate`.
pub fn describe(result: &SimResult) -> String {
    format!(
        "{} k={} faults={} hits={}",
        result.policy,
        result.k,
        result.faults,
        result.hits()
    )
}

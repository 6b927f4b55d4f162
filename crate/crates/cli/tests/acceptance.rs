//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! blocking criterion fails. Run with `cargo test --test acceptance`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use moe_paging::generators::{
    coupon_cover_time, cover_time_lower_bound, gen_adaptive_adversary,
    gen_fixed_partition_adversary, gen_lru_nemesis, gen_yao_random, gen_zipf, starved_layer,
    ZipfParams,
};
use moe_paging::model::read_trace;
use moe_paging::offline::{belady_simulate, dp_opt, OracleCap};
use moe_paging::policies::Lru;
use moe_paging::{CacheSize, LayeredTrace, ModelShape, PolicyKind};
use moe_paging_cli::config::{ConfigLayer, ExperimentConfig, ExperimentKind, OneOrMany};
use moe_paging_cli::experiments::{
    compare_normalized, grid_opt_vs_dist, normalized, oracle_instance, sweep_k, sweep_zipf_a,
};

type Outcome = Result<String, String>;

fn k(v: u32) -> CacheSize {
    CacheSize::new(v).unwrap()
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Suite {
    failures: Vec<&'static str>,
}

impl Suite {
    fn run(&mut self, name: &'static str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let over = budget.is_some_and(|b| elapsed > b);
        let (ok, detail) = match outcome {
            Ok(d) if over => (false, format!("{d}; over time budget {:?}", budget.unwrap())),
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        println!(
            "{} {name}: {detail} [{:.2}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !ok {
            self.failures.push(name);
        }
    }
}

fn oracle_equivalence() -> Outcome {
    let count = 200;
    let mut bad = Vec::new();
    for i in 0..count {
        let (trace, cap) = oracle_instance(i).map_err(|e| e.to_string())?;
        let b = belady_simulate(&trace, cap).faults;
        let d = dp_opt(&trace, cap, OracleCap::default()).map_err(|e| e.to_string())?;
        if b != d {
            bad.push(format!("#{i}: belady {b} vs exact {d}"));
        }
    }
    check(bad.is_empty(), format!("{count} instances, mismatches: {bad:?}"))
}

fn nemesis() -> Outcome {
    let (cap, l) = (k(5), 2);
    let trace = gen_lru_nemesis(cap, l).map_err(|e| e.to_string())?.trace(5_000);
    let warmup = trace.shape().page_count() as usize;
    let lru = PolicyKind::Lru.run(&trace, cap, 0).map_err(|e| e.to_string())?;
    let opt = belady_simulate(&trace, cap);
    let ratio = normalized(lru.faults_after(warmup), opt.faults_after(warmup));
    check(
        trace.len() == 10_000 && (4.5..=5.05).contains(&ratio),
        format!(
            "{} requests, lru {} / opt {} after {warmup} warmup = {ratio:.4} (want [4.5, 5.05])",
            trace.len(),
            lru.faults_after(warmup),
            opt.faults_after(warmup)
        ),
    )
}

fn fixed_partition() -> Outcome {
    let (n, l, cap) = (2, 2, k(3));
    let z = starved_layer(cap, l, n).ok_or("no starved layer")?;
    let trace = gen_fixed_partition_adversary(n, l, z, 10_000, cap).map_err(|e| e.to_string())?;
    let warmup = trace.shape().page_count() as usize;
    let dist = PolicyKind::LruDist.run(&trace, cap, 0).map_err(|e| e.to_string())?;
    let opt = belady_simulate(&trace, cap);
    let ratio = normalized(dist.faults, opt.faults);
    check(
        opt.faults_after(warmup) <= 3 && dist.faults >= 5_000 && ratio > 50.0,
        format!(
            "z={z}: opt {} total, {} after warmup; lru-dist {}; ratio {ratio:.1}",
            opt.faults,
            opt.faults_after(warmup),
            dist.faults
        ),
    )
}

fn adaptive() -> Outcome {
    let (n, l) = (2, 2);
    let cap = n * l - 1;
    let run = gen_adaptive_adversary(Lru::new(), n, l, 2_000).map_err(|e| e.to_string())?;
    let warmup = run.warmup_requests();
    let adversarial: u64 = run.adversarial_faults_per_round().iter().sum();
    let opt = belady_simulate(&run.trace, k(cap));
    let per = u64::from(cap - l + 1);
    let ratio = normalized(run.result.faults_after(warmup), opt.faults_after(warmup));
    check(
        adversarial == 2_000 && opt.faults <= 2_000 / per + warmup as u64 && ratio >= 1.8,
        format!(
            "lru faults in adversarial rounds {adversarial}; opt {} (limit {}); ratio {ratio:.4} (want >= 1.8)",
            opt.faults,
            2_000 / per + warmup as u64
        ),
    )
}

fn cover_times() -> Outcome {
    let samples = 100_000;
    let mut worst = f64::INFINITY;
    let mut bad = Vec::new();
    for n in [2, 4, 8] {
        for c in [1, 4, 16, 64] {
            let e = coupon_cover_time(n, c, samples, 2024).map_err(|e| e.to_string())?;
            let bound = cover_time_lower_bound(n, c);
            let z = (e.mean - bound) / e.stderr.max(f64::MIN_POSITIVE);
            worst = worst.min(z);
            // C = 1 makes the bound the exact mean, hence the 3-sigma slack
            if e.mean + 3.0 * e.stderr < bound {
                bad.push(format!("N={n} C={c}: {:.4} < {bound:.4}", e.mean));
            }
        }
    }
    let e = coupon_cover_time(4, 1, samples, 7).map_err(|e| e.to_string())?;
    let rel = (e.mean - 25.0 / 3.0).abs() / (25.0 / 3.0);
    check(
        bad.is_empty() && rel <= 0.02,
        format!(
            "12 cells at {samples} samples, min (mean-bound)/stderr = {worst:.2}, violations {bad:?}; N=4 C=1 mean {:.4} ({:.3}% off 25/3)",
            e.mean,
            rel * 100.0
        ),
    )
}

fn llru_equals_lru_classic() -> Outcome {
    let mut compared = 0;
    for seed in 0..50u64 {
        let n = 2 + (seed % 6) as u32;
        let trace = gen_yao_random(n, 1, 300, seed).map_err(|e| e.to_string())?;
        for cap in 1..=n {
            let a = PolicyKind::Lru.run(&trace, k(cap), 0).map_err(|e| e.to_string())?;
            let b = PolicyKind::Llru.run(&trace, k(cap), 0).map_err(|e| e.to_string())?;
            if a.outcomes != b.outcomes {
                return Err(format!("seed {seed}, n={n}, k={cap}: outcomes differ"));
            }
            compared += 1;
        }
    }
    Ok(format!("50 traces, {compared} (trace, k) pairs step-identical"))
}

fn fixture_trace() -> LayeredTrace {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/three_tokens.trace");
    read_trace(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

fn suite_traces() -> Result<Vec<LayeredTrace>, String> {
    let e = |e: moe_paging::generators::GenError| e.to_string();
    let mut traces = vec![fixture_trace()];
    for i in 0..100 {
        traces.push(oracle_instance(i).map_err(|e| e.to_string())?.0);
    }
    for (seed, (n, l)) in [(4, 4), (8, 4), (3, 6), (16, 8)].into_iter().enumerate() {
        let shape = ModelShape::new(n, l).unwrap();
        for a in [0.5, 1.2, 2.0] {
            traces.push(gen_zipf(shape, &ZipfParams::new(a, 0.0, true).unwrap(), 150, seed as u64).map_err(e)?);
        }
        traces.push(gen_yao_random(n, l, 150, 100 + seed as u64).map_err(e)?);
    }
    traces.push(gen_lru_nemesis(k(5), 2).map_err(e)?.trace(300));
    traces.push(gen_fixed_partition_adversary(2, 2, 2, 300, k(3)).map_err(e)?);
    traces.push(gen_adaptive_adversary(Lru::new(), 3, 2, 200).map_err(e)?.trace);
    Ok(traces)
}

fn restricted_dominance() -> Outcome {
    let traces = suite_traces()?;
    let mut runs = 0;
    for (ti, t) in traces.iter().enumerate() {
        let shape = t.shape();
        let max = shape.page_count() as u32;
        for cap in [1, 2, 3, shape.layers(), max / 2, max.saturating_sub(1), max] {
            if cap == 0 {
                continue;
            }
            let opt = belady_simulate(t, k(cap)).faults;
            for p in PolicyKind::ALL {
                if p == PolicyKind::Opt || (p.is_split() && cap < shape.layers()) {
                    continue;
                }
                let f = p.run(t, k(cap), ti as u64).map_err(|e| e.to_string())?.faults;
                if f < opt {
                    return Err(format!("trace {ti}, k={cap}: {p} {f} < opt {opt}"));
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{} traces, {runs} policy runs, none below OPT", traces.len()))
}

fn cfg(kind: ExperimentKind, layer: ConfigLayer) -> Result<ExperimentConfig, String> {
    ExperimentConfig::resolve(kind, &layer, None).map_err(|e| format!("{e:#}"))
}

fn fig5() -> Outcome {
    let grid = grid_opt_vs_dist(&cfg(
        ExperimentKind::GridOptDist,
        ConfigLayer {
            k: Some(OneOrMany::One(16)),
            a: Some(2.0),
            ..Default::default()
        },
    )?)
    .map_err(|e| e.to_string())?;
    let fits: Vec<_> = grid.cells.iter().filter(|c| c.all_fits).collect();
    let fits_ok = !fits.is_empty() && fits.iter().all(|c| c.ratio == Some(1.0));
    let under_max = grid
        .cells
        .iter()
        .filter(|c| !c.all_fits)
        .filter_map(|c| c.ratio)
        .fold(0.0, f64::max);

    let sweep = sweep_zipf_a(&cfg(
        ExperimentKind::SweepZipfA,
        ConfigLayer {
            k: Some(OneOrMany::One(64)),
            n: Some(8),
            l: Some(32),
            a_values: Some(vec![0.01, 50.0]),
            ..Default::default()
        },
    )?)
    .map_err(|e| e.to_string())?;
    let lo = sweep.at(0.01).and_then(|p| p.ratio).unwrap_or(f64::NAN);
    let hi = sweep.at(50.0).and_then(|p| p.ratio).unwrap_or(f64::NAN);
    check(
        fits_ok && under_max > 1.5 && lo > 1.2 && hi < 1.1,
        format!(
            "{} all-fits cells at ratio 1.0: {fits_ok}; max under-provisioned ratio {under_max:.4} (> 1.5); a=0.01 ratio {lo:.4} (> 1.2); a=50 ratio {hi:.4} (< 1.1)",
            fits.len()
        ),
    )
}

fn sweep_endpoints() -> Outcome {
    let dir = std::env::temp_dir().join("moe-paging-acceptance-traces");
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let e = |e: moe_paging::generators::GenError| e.to_string();
    let traces = [
        ("fixture", fixture_trace()),
        ("zipf", gen_zipf(ModelShape::new(8, 4).unwrap(), &ZipfParams::new(1.2, 0.0, false).unwrap(), 300, 5).map_err(e)?),
        ("yao", gen_yao_random(3, 5, 200, 6).map_err(e)?),
        ("nemesis", gen_lru_nemesis(k(5), 2).map_err(e)?.trace(100)),
    ];
    let mut checked = 0;
    let mut skipped = 0;
    for (name, t) in traces {
        let path = dir.join(format!("{name}.trace"));
        let mut f = std::fs::File::create(&path).map_err(|e| e.to_string())?;
        moe_paging::model::write_trace(&mut f, &t, &[]).map_err(|e| e.to_string())?;
        let max = t.shape().page_count() as u32;
        let c = cfg(
            ExperimentKind::SweepK,
            ConfigLayer {
                trace: Some(OneOrMany::One(path)),
                k: Some(OneOrMany::Many(vec![1, max])),
                ..Default::default()
            },
        )?;
        let s = sweep_k(&c).map_err(|e| e.to_string())?;
        for p in PolicyKind::ALL {
            match s.table.find(name, p.name(), 1) {
                Some(r) if r.faults != t.len() as u64 => {
                    return Err(format!("{name} {p} k=1: {} faults, length {}", r.faults, t.len()))
                }
                Some(_) => checked += 1,
                None if p.is_split() => skipped += 1,
                None => return Err(format!("{name} {p} k=1 missing")),
            }
            let r = s.table.find(name, p.name(), max).ok_or(format!("{name} {p} k={max} missing"))?;
            if r.faults != t.distinct_pages() as u64 {
                return Err(format!("{name} {p} k={max}: {} faults, {} distinct", r.faults, t.distinct_pages()));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "4 traces, {checked} endpoint runs exact; {skipped} split-policy runs at k=1 < l not defined"
    ))
}

fn llru_vs_lru_finding() -> Outcome {
    let c = cfg(
        ExperimentKind::Compare,
        ConfigLayer {
            n: Some(16),
            l: Some(32),
            k: Some(OneOrMany::One(200)),
            a: Some(1.2),
            seed: Some(1),
            traces: Some(10),
            policy: Some(OneOrMany::Many(vec!["lru".into(), "llru".into()])),
            ..Default::default()
        },
    )?;
    let cmp = compare_normalized(&c).map_err(|e| e.to_string())?;
    let fmt = |p| {
        let s = cmp.summary(p).unwrap();
        format!(
            "{p} min {:.4} q1 {:.4} median {:.4} q3 {:.4} max {:.4}",
            s.min, s.q1, s.median, s.q3, s.max
        )
    };
    let (a, b) = (
        cmp.summary(PolicyKind::Llru).unwrap().median,
        cmp.summary(PolicyKind::Lru).unwrap().median,
    );
    check(a <= b, format!("{}; {}", fmt(PolicyKind::Llru), fmt(PolicyKind::Lru)))
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: Vec::new() };
    let secs = Duration::from_secs;
    suite.run("oracle-equivalence", Some(secs(60)), oracle_equivalence);
    suite.run("lru-nemesis", Some(secs(5)), nemesis);
    suite.run("fixed-partition", Some(secs(5)), fixed_partition);
    suite.run("adaptive-adversary", Some(secs(5)), adaptive);
    suite.run("cover-time-bounds", Some(secs(30)), cover_times);
    suite.run("llru-lru-coincidence", None, llru_equals_lru_classic);
    suite.run("restricted-dominance", None, restricted_dominance);
    suite.run("opt-dist-grid-and-zipf-sweep", Some(secs(120)), fig5);
    suite.run("sweep-endpoints", None, sweep_endpoints);

    // not blocking: recorded traces are unavailable, this is a substitute
    let start = Instant::now();
    let finding = llru_vs_lru_finding();
    let (tag, detail) = match &finding {
        Ok(d) => ("PASS", d.as_str()),
        Err(d) => ("FINDING", d.as_str()),
    };
    println!(
        "{tag} llru-median-le-lru (non-blocking): {detail} [{:.2}s]",
        start.elapsed().as_secs_f64()
    );

    if suite.failures.is_empty() {
        println!("acceptance: all blocking criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", suite.failures.join(", "));
        ExitCode::FAILURE
    }
}

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use moe_paging::ingest::{parse_moe_trace, round_expand, trace_stats};
use moe_paging::model::write_trace;
use moe_paging_cli::config::{load_trace, CommonArgs, ExperimentConfig, ExperimentKind};
use moe_paging_cli::experiments;

#[derive(Parser)]
#[command(name = "moe-paging", version, about = "Layered paging simulator and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that trace files obey the layer constraint.
    Validate {
        #[arg(long, required = true)]
        trace: Vec<PathBuf>,
    },
    /// Write a synthetic or adversarial trace (to --out, or stdout).
    Generate(CommonArgs),
    /// Convert a JSONL expert-selection record to a canonical trace file.
    Ingest {
        #[arg(long)]
        trace: PathBuf,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run policies on traces at the given cache sizes.
    Simulate(CommonArgs),
    /// Faults versus cache size.
    SweepK(CommonArgs),
    /// Faults normalized by OPT over several traces at one cache size.
    Compare(CommonArgs),
    /// OPT-Dist/OPT over a grid of (n, l).
    GridOptDist(CommonArgs),
    /// OPT-Dist/OPT as the Zipf exponent varies.
    SweepZipfA(CommonArgs),
    /// Run the lower-bound and oracle checks; exits nonzero on failure.
    VerifyTheory(CommonArgs),
    /// Print summary statistics of a trace as JSON.
    Stats {
        #[arg(long)]
        trace: PathBuf,
    },
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p.as_os_str() != "-" => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn experiment(kind: ExperimentKind, args: &CommonArgs) -> Result<ExitCode> {
    let cfg = ExperimentConfig::from_args(kind, args)?;
    cfg.prepare_out()?;
    let out = &cfg.out;
    match kind {
        ExperimentKind::Simulate => {
            let traces = cfg.source.load(cfg.seed)?;
            let table = experiments::simulate_all(&traces, &cfg.policies, &cfg.k, cfg.seed)?;
            for r in &table.rows {
                println!("{} {} k={} faults={}", r.trace_id, r.policy, r.k, r.faults);
            }
            table.write_csv(&out.join("results.csv"))?;
            table.write_timings(&out.join("timings.csv"))?;
        }
        ExperimentKind::SweepK => {
            let s = experiments::sweep_k(&cfg)?;
            for d in &s.increases {
                println!(
                    "{} {}: faults rise from {} at k={} to {} at k={}",
                    d.trace_id, d.policy, d.faults_prev, d.k_prev, d.faults, d.k
                );
            }
            s.emit(out)?;
        }
        ExperimentKind::Compare => {
            let c = experiments::compare_normalized(&cfg)?;
            for s in &c.summaries {
                let b = s.summary();
                println!(
                    "{:<13} min={:.4} q1={:.4} median={:.4} q3={:.4} max={:.4}",
                    s.policy, b.min, b.q1, b.median, b.q3, b.max
                );
            }
            c.emit(out)?;
        }
        ExperimentKind::GridOptDist => {
            let g = experiments::grid_opt_vs_dist(&cfg)?;
            for c in &g.cells {
                match c.ratio {
                    Some(r) => println!("n={} l={} ratio={r:.4}", c.n, c.l),
                    None => println!("n={} l={} n/a (k < l)", c.n, c.l),
                }
            }
            g.emit(out)?;
        }
        ExperimentKind::SweepZipfA => {
            let s = experiments::sweep_zipf_a(&cfg)?;
            for p in &s.points {
                match p.ratio {
                    Some(r) => println!("a={} ratio={r:.4}", p.a),
                    None => println!("a={} n/a (k < l)", p.a),
                }
            }
            s.emit(out)?;
        }
        ExperimentKind::VerifyTheory => {
            let report = experiments::verify_theory(&cfg)?;
            report.emit(out)?;
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.criterion);
            }
            if !report.passed {
                eprintln!("failed checks: {}", report.failed().join(", "));
                return Ok(ExitCode::FAILURE);
            }
        }
        ExperimentKind::Generate => unreachable!("handled separately"),
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { trace } => {
            let mut ok = true;
            for path in &trace {
                match load_trace(path) {
                    Ok(t) => {
                        let report = t.validate();
                        println!(
                            "ok {}: n={} l={} length={} rounds={} ragged_tail={}",
                            path.display(),
                            t.shape().experts(),
                            t.shape().layers(),
                            report.length,
                            t.rounds(),
                            report.ragged_tail
                        );
                    }
                    Err(e) => {
                        ok = false;
                        println!("invalid {}: {e:#}", path.display());
                    }
                }
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Generate(args) => {
            let cfg = ExperimentConfig::from_args(ExperimentKind::Generate, &args)?;
            let trace = cfg.generator.generate(cfg.seed)?;
            let mut w = output(Some(&cfg.out))?;
            write_trace(&mut w, &trace, &[cfg.generator.describe(cfg.seed)])?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Ingest { trace, out } => {
            let file = File::open(&trace).with_context(|| format!("opening {}", trace.display()))?;
            let raw = parse_moe_trace(BufReader::new(file))
                .with_context(|| format!("ingesting {}", trace.display()))?;
            let expanded = round_expand(&raw);
            let mut comments = vec![format!(
                "ingested from {} e={}",
                trace.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned()),
                raw.experts_per_layer
            )];
            if let Some(m) = &raw.model {
                comments.push(format!("model={m}"));
            }
            let mut w = output(out.as_ref())?;
            write_trace(&mut w, &expanded, &comments)?;
            w.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { trace } => {
            let t = load_trace(&trace)?;
            println!("{}", serde_json::to_string_pretty(&trace_stats(&t))?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate(a) => experiment(ExperimentKind::Simulate, &a),
        Command::SweepK(a) => experiment(ExperimentKind::SweepK, &a),
        Command::Compare(a) => experiment(ExperimentKind::Compare, &a),
        Command::GridOptDist(a) => experiment(ExperimentKind::GridOptDist, &a),
        Command::SweepZipfA(a) => experiment(ExperimentKind::SweepZipfA, &a),
        Command::VerifyTheory(a) => experiment(ExperimentKind::VerifyTheory, &a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use flowlab::experiments::{
    average_arrival_time, breakpoint_count, decide_via_ns, decide_via_ssp, iteration_census,
    parametric_curve, partition_oracle, smallest_zero_k, ssp_budget, Algorithm,
};
use flowlab::export::export_network_dot;
use flowlab::gadgets::{
    build_counting_ns, build_counting_ssp, build_gns_with, build_gssp, build_ns_harness,
    normalize_instance, GadgetNetwork, GnsOptions, PartitionInstance,
};
use flowlab::netsimplex::{NsOptions, NsRunner, NsTraceWriter, DEFAULT_MAX_PIVOTS};
use flowlab::ssp::{SspRunner, SspTrace, SspTraceWriter, DEFAULT_MAX_ITERATIONS};
use flowlab::{ArcId, Network, Rational};

/// Exact min-cost flow gadgets, SSP and network simplex runs, PARTITION decisions
#[derive(Parser, Debug)]
#[command(name = "flowlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a gadget network plus its sidecar
    Gen {
        family: GenFamily,
        /// Comma-separated positive rationals, e.g. 1/2,3,5/7
        #[arg(long, value_parser = parse_list)]
        a: RatList,
        #[arg(long, default_value = "1", allow_hyphen_values = true, value_parser = parse_sign)]
        sign: i8,
        #[arg(long, default_value = "1/3")]
        r: Rational,
        /// Gadget level (defaults to the instance length)
        #[arg(long)]
        level: Option<usize>,
        /// Perturb the S^{-a} costs of G_ns
        #[arg(long)]
        perturb: bool,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run an algorithm on a network file
    Run {
        algo: RunAlgo,
        file: PathBuf,
        /// Label of an arc to watch (repeatable; defaults to the sidecar's)
        #[arg(long)]
        watch: Vec<String>,
        /// Stream the trace to this file
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        max_iter: Option<u64>,
    },
    /// Decide a PARTITION instance
    Decide {
        #[arg(long, value_parser = parse_list)]
        a: RatList,
        #[arg(long)]
        algo: DecideAlgo,
        /// Also report the iteration census
        #[arg(long)]
        census: bool,
    },
    /// Parametric curve of an SSP trace
    Curve {
        trace: PathBuf,
        #[arg(long)]
        arrival_horizon: Option<Rational>,
    },
    /// Render a network
    Export {
        file: PathBuf,
        #[arg(long)]
        format: ExportFormat,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GenFamily {
    Nssp,
    Gssp,
    NsGadget,
    NsHarness,
    Gns,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RunAlgo {
    Ssp,
    Ns,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DecideAlgo {
    Ssp,
    Ns,
    Oracle,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExportFormat {
    Dot,
    Json,
}

#[derive(Clone, Debug)]
struct RatList(Vec<Rational>);

fn parse_list(s: &str) -> Result<RatList, String> {
    let vals: Vec<Rational> = s
        .split(',')
        .map(|x| x.trim().parse::<Rational>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    if let Some(bad) = vals.iter().find(|v| !v.is_positive()) {
        return Err(format!("entries must be positive, found {bad}"));
    }
    Ok(RatList(vals))
}

fn parse_sign(s: &str) -> Result<i8, String> {
    match s {
        "1" | "+1" | "+" => Ok(1),
        "-1" | "-" => Ok(-1),
        _ => Err(format!("sign must be +1 or -1, got {s}")),
    }
}

fn sidecar_path(file: &Path) -> PathBuf {
    file.with_extension("sidecar.json")
}

fn instance(a: &[Rational]) -> Result<PartitionInstance> {
    Ok(normalize_instance(a)?)
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn load(file: &Path) -> Result<(Network, Option<GadgetNetwork>)> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let net = Network::from_json(&text)?;
    let side = sidecar_path(file);
    if side.exists() {
        let side_text = fs::read_to_string(&side)?;
        let g = GadgetNetwork::from_sidecar(net.clone(), &side_text)
            .with_context(|| format!("loading {}", side.display()))?;
        Ok((net, Some(g)))
    } else {
        Ok((net, None))
    }
}

fn gen(
    family: GenFamily,
    a: &[Rational],
    sign: i8,
    r: &Rational,
    level: Option<usize>,
    perturb: bool,
    output: &Path,
) -> Result<()> {
    let inst = instance(a)?;
    let level = level.unwrap_or(inst.len());
    let g = match family {
        GenFamily::Nssp => build_counting_ssp(&inst, sign, level)?,
        GenFamily::Gssp => build_gssp(&inst),
        GenFamily::NsGadget => build_counting_ns(&inst, sign, r, level)?,
        GenFamily::NsHarness => build_ns_harness(&inst, sign, r, level)?,
        GenFamily::Gns => build_gns_with(&inst, &GnsOptions { perturb }),
    };
    fs::write(output, g.net.to_json()).with_context(|| format!("writing {}", output.display()))?;
    let side = sidecar_path(output);
    fs::write(&side, g.sidecar_json()).with_context(|| format!("writing {}", side.display()))?;
    println!(
        "{}",
        json!({
            "network": output.display().to_string(),
            "sidecar": side.display().to_string(),
            "nodes": g.net.node_count(),
            "arcs": g.net.arc_count(),
            "normalized": strings(&inst.normalized),
            "epsilon": inst.epsilon.to_string(),
        })
    );
    Ok(())
}

fn watched_arcs(net: &Network, gadget: Option<&GadgetNetwork>, labels: &[String]) -> Result<Vec<ArcId>> {
    if labels.is_empty() {
        return Ok(gadget.map(|g| g.watched.clone()).unwrap_or_default());
    }
    let mut out = Vec::new();
    for l in labels {
        let found = net.arcs_by_label(l);
        if found.is_empty() {
            bail!("no arc labelled {l:?}");
        }
        out.extend(found);
    }
    Ok(out)
}

fn trace_sink(path: Option<&PathBuf>) -> Result<Option<BufWriter<File>>> {
    path.map(|p| {
        File::create(p)
            .map(BufWriter::new)
            .with_context(|| format!("creating {}", p.display()))
    })
    .transpose()
}

fn run_ssp(net: &Network, gadget: Option<&GadgetNetwork>, watched: &[ArcId], trace: Option<&PathBuf>, max_iter: Option<u64>) -> Result<Value> {
    let budget = max_iter.unwrap_or_else(|| gadget.map_or(DEFAULT_MAX_ITERATIONS, |g| ssp_budget(g.meta.n)));
    let mut runner = SspRunner::new(net, watched, budget)?;
    let mut writer = trace_sink(trace)?.map(SspTraceWriter::new).transpose()?;
    let mut first_use = None;
    while let Some(it) = runner.step()? {
        if first_use.is_none() && it.watched_flow.as_ref().is_some_and(Rational::is_positive) {
            first_use = Some(it.index);
        }
        if let Some(w) = writer.as_mut() {
            w.write(&it)?;
        }
    }
    if let Some(w) = writer {
        w.finish(runner.total_cost())?;
    }
    Ok(json!({
        "algorithm": "ssp",
        "iterations": runner.iterations_done(),
        "routed": runner.routed().to_string(),
        "totalCost": runner.total_cost().to_string(),
        "firstWatchedUse": first_use,
    }))
}

fn run_ns(net: &Network, gadget: Option<&GadgetNetwork>, watched: Vec<ArcId>, trace: Option<&PathBuf>, max_iter: Option<u64>) -> Result<Value> {
    let g = gadget.ok_or_else(|| anyhow!("network simplex needs a sidecar with an initial basis"))?;
    let basis = g
        .initial_basis
        .clone()
        .ok_or_else(|| anyhow!("sidecar has no initial basis"))?;
    let opts = NsOptions {
        watched,
        max_pivots: max_iter.unwrap_or(DEFAULT_MAX_PIVOTS),
        ..NsOptions::default()
    };
    let mut runner = NsRunner::new(net, basis, g.initial_flow.clone(), opts)?;
    let mut writer = trace_sink(trace)?.map(NsTraceWriter::new).transpose()?;
    let (mut first_entry, mut entering_ties, mut leaving_ties) = (None, 0u64, 0u64);
    while let Some(p) = runner.step()? {
        if first_entry.is_none() && p.watched_entered {
            first_entry = Some(p.index);
        }
        entering_ties += p.entering_tie as u64;
        leaving_ties += p.leaving_tie as u64;
        if let Some(w) = writer.as_mut() {
            w.write(&p)?;
        }
    }
    let pivots = runner.pivots_done();
    let (flow, basis, objective) = runner.into_parts();
    if let Some(w) = writer {
        w.finish(&flow, &basis, &objective)?;
    }
    Ok(json!({
        "algorithm": "ns",
        "pivots": pivots,
        "objective": objective.to_string(),
        "firstWatchedEntry": first_entry,
        "enteringTies": entering_ties,
        "leavingTies": leaving_ties,
    }))
}

fn decide(a: &[Rational], algo: DecideAlgo, census: bool) -> Result<Value> {
    let inst = instance(a)?;
    let mut out = json!({
        "instance": strings(&inst.raw),
        "normalized": strings(&inst.normalized),
        "epsilon": inst.epsilon.to_string(),
    });
    let obj = out.as_object_mut().expect("object");
    match algo {
        DecideAlgo::Oracle => {
            let subset = partition_oracle(&inst)?;
            obj.insert("algorithm".into(), json!("oracle"));
            obj.insert("answer".into(), json!(subset.is_some()));
            obj.insert("oracleSubset".into(), json!(subset));
            obj.insert("smallestZeroK".into(), json!(smallest_zero_k(&inst)?));
        }
        DecideAlgo::Ssp | DecideAlgo::Ns => {
            let (name, which, v) = match algo {
                DecideAlgo::Ssp => ("ssp", Algorithm::Ssp, decide_via_ssp(&inst)?),
                _ => ("ns", Algorithm::Ns, decide_via_ns(&inst)?),
            };
            obj.insert("algorithm".into(), json!(name));
            obj.insert("answer".into(), json!(v.answer));
            obj.insert("witnessIteration".into(), json!(v.witness));
            obj.insert("oracleSubset".into(), json!(v.oracle_subset));
            obj.insert("iterations".into(), json!(v.iterations));
            if census {
                obj.insert("census".into(), serde_json::to_value(iteration_census(&inst, which)?)?);
            }
        }
    }
    Ok(out)
}

fn curve(trace: &Path, horizon: Option<&Rational>) -> Result<Value> {
    let text = fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?;
    let t = SspTrace::from_json(&text).context("parsing SSP trace")?;
    let c = parametric_curve(&t);
    let mut out = json!({
        "breakpoints": c.breakpoints.iter().map(|(x, y)| [x.to_string(), y.to_string()]).collect::<Vec<_>>(),
        "slopes": strings(&c.slopes()),
        "breakpointCount": breakpoint_count(&c),
    });
    if let Some(h) = horizon {
        out["averageArrivalTime"] = json!(average_arrival_time(&t, h)?.to_string());
    }
    Ok(out)
}

fn export(file: &Path, format: ExportFormat) -> Result<String> {
    let (net, gadget) = load(file)?;
    Ok(match format {
        ExportFormat::Json => net.to_json(),
        ExportFormat::Dot => match &gadget {
            Some(g) => export_network_dot(&g.net, &g.watched, &g.basis_arcs),
            None => export_network_dot(&net, &[], &BTreeSet::new()),
        },
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Gen { family, a, sign, r, level, perturb, output } => {
            gen(family, &a.0, sign, &r, level, perturb, &output)?;
        }
        Command::Run { algo, file, watch, trace, max_iter } => {
            let (net, gadget) = load(&file)?;
            let watched = watched_arcs(&net, gadget.as_ref(), &watch)?;
            let summary = match algo {
                RunAlgo::Ssp => run_ssp(&net, gadget.as_ref(), &watched, trace.as_ref(), max_iter)?,
                RunAlgo::Ns => run_ns(&net, gadget.as_ref(), watched, trace.as_ref(), max_iter)?,
            };
            writeln!(stdout, "{summary}")?;
        }
        Command::Decide { a, algo, census } => {
            writeln!(stdout, "{}", decide(&a.0, algo, census)?)?;
        }
        Command::Curve { trace, arrival_horizon } => {
            writeln!(stdout, "{}", curve(&trace, arrival_horizon.as_ref())?)?;
        }
        Command::Export { file, format } => {
            write!(stdout, "{}", export(&file, format)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

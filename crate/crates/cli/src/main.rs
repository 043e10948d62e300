use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use maxent_evalues::diagnostics::{
    gap_r, gap_r_prime, regret_curve, sweep, theorem1_cells, worst_case_r_prime, SweepConfig,
};
use maxent_evalues::evariables::{
    combine_evalues, decide, e_power_factorized, log_e_gro_mic, post_hoc_level, solve_canonical,
    solve_point, EValueReport, Reference, RiprMethod, SolverSettings, Statistic,
};
use maxent_evalues::io::{
    network_groups, network_to_table, parse_table, table_to_json, NetworkInput, NetworkMode, RunConfig,
    TableFormat,
};
use maxent_evalues::models::{MeanParams, Table};
use maxent_evalues::priors::{pseudo_null_density, PriorSpec};
use maxent_evalues::{Error, LogValue};

/// Growth-rate optimal e-values for 2×k binary contingency tables.
#[derive(Parser)]
#[command(name = "maxent-evalues", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an e-value on a table.
    Test(TestArgs),
    /// E-powers of the microcanonical, canonical and pseudo statistics.
    Epower(DesignArgs),
    /// Gap r between the pseudo and microcanonical e-powers.
    Gap(DesignArgs),
    /// r' at one alternative or its worst case over a grid.
    Rprime(RprimeArgs),
    /// Regret of the microcanonical statistic against m, with fitted slopes.
    Regret(RegretArgs),
    /// Distance between the normalized count and its limiting prior.
    Theorem1(Theorem1Args),
    /// Combine e-values from independent batches.
    Continue(ContinueArgs),
    /// Build a table from a network and test it.
    NetTest(NetTestArgs),
    /// Evaluate a diagnostic over a grid described by a JSON config.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum StatisticArg {
    Mic,
    Pseudo,
    Can,
    Point,
}

#[derive(Args, Clone)]
struct PriorArgs {
    /// Prior per group (uniform, nml, beta:a,b, beta:g, explicit:p0,p1,...);
    /// a single prior applies to every group.
    #[arg(long = "prior")]
    priors: Vec<String>,
    /// Shorthand for --prior beta:g,g.
    #[arg(long, conflicts_with = "priors")]
    gamma: Option<f64>,
}

impl PriorArgs {
    fn specs(&self) -> anyhow::Result<Vec<PriorSpec<f64>>> {
        if let Some(g) = self.gamma {
            return Ok(vec![PriorSpec::symmetric(g)?]);
        }
        if self.priors.is_empty() {
            return Ok(vec![PriorSpec::Uniform]);
        }
        self.priors
            .iter()
            .map(|s| s.parse::<PriorSpec<f64>>().map_err(Into::into))
            .collect()
    }
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Grid points of the canonical null mixture.
    #[arg(long, default_value_t = 2001)]
    grid_size: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50_000)]
    max_iter: usize,
    /// Use the multiplicative fixed-point update instead of Newton steps.
    #[arg(long)]
    em: bool,
}

impl SolverArgs {
    fn settings(&self) -> SolverSettings {
        SolverSettings {
            grid_size: self.grid_size,
            tol: self.tol,
            max_iter: self.max_iter,
            method: if self.em { RiprMethod::Em } else { RiprMethod::Newton },
        }
    }
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    table: PathBuf,
    /// json or csv; inferred from the extension by default.
    #[arg(long)]
    format: Option<String>,
    #[command(flatten)]
    priors: PriorArgs,
    #[arg(long, value_enum, default_value = "mic")]
    statistic: StatisticArg,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Resolution scale of the pseudo null density.
    #[arg(long, default_value_t = 10_000)]
    scale: usize,
    /// Alternative parameters for --statistic point, comma separated.
    #[arg(long)]
    palt: Option<String>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Clone)]
struct DesignArgs {
    #[command(flatten)]
    priors: PriorArgs,
    /// Group sizes, comma separated.
    #[arg(long, conflicts_with_all = ["k", "m"])]
    sizes: Option<String>,
    /// Number of groups of equal size --m.
    #[arg(long, requires = "m")]
    k: Option<usize>,
    #[arg(long, requires = "k")]
    m: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    scale: usize,
    /// Include the per-c0 log ratios in the gap report.
    #[arg(long)]
    per_point: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

impl DesignArgs {
    fn config(&self) -> anyhow::Result<(RunConfig<f64>, Vec<PriorSpec<f64>>)> {
        let sizes = match (&self.sizes, self.k, self.m) {
            (Some(s), _, _) => parse_list(s)?,
            (None, Some(k), Some(m)) => vec![m; k],
            _ => bail!("give --sizes or both --k and --m"),
        };
        let mut cfg = RunConfig::new(self.priors.specs()?, sizes);
        cfg.scale = self.scale;
        cfg.solver = self.solver.settings();
        cfg.validate()?;
        let specs = cfg.specs_for(cfg.sizes.len())?;
        Ok((cfg, specs))
    }
}

#[derive(Args)]
struct RprimeArgs {
    #[command(flatten)]
    design: DesignArgs,
    /// Alternative parameters, comma separated.
    #[arg(long, conflicts_with = "worst_case")]
    palt: Option<String>,
    /// Maximize over the product grid instead.
    #[arg(long)]
    worst_case: bool,
    #[arg(long, default_value_t = 0.02)]
    lo: f64,
    #[arg(long, default_value_t = 0.98)]
    hi: f64,
    #[arg(long, default_value_t = 0.02)]
    step: f64,
}

#[derive(Args)]
struct RegretArgs {
    #[command(flatten)]
    priors: PriorArgs,
    /// Alternative parameters, comma separated; repeat for several points.
    #[arg(long, required = true)]
    palt: Vec<String>,
    /// Group sizes m (all groups equal), comma separated.
    #[arg(long, default_value = "600,800,1000,1200,1400,1600,1800")]
    ms: String,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct Theorem1Args {
    #[arg(long, default_value = "uniform")]
    prior: String,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 20)]
    bins: usize,
}

#[derive(Args)]
struct ContinueArgs {
    /// E-values, or paths to JSON reports with a `log_e` field.
    #[arg(required = true)]
    values: Vec<String>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    SbmUndirected,
    SbmDirected,
    PcmBipartite,
}

#[derive(Args)]
struct NetTestArgs {
    /// Edge list CSV with rows `u,v`.
    #[arg(long, requires_all = ["partition", "mode"], conflicts_with = "biadjacency")]
    edges: Option<PathBuf>,
    /// Partition CSV with rows `node,block`.
    #[arg(long)]
    partition: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// 0/1 biadjacency CSV; rows are the constrained layer.
    #[arg(long)]
    biadjacency: Option<PathBuf>,
    #[command(flatten)]
    priors: PriorArgs,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration.
    #[arg(long)]
    config: PathBuf,
    /// Also write one TSV row per grid cell here.
    #[arg(long)]
    tsv: Option<PathBuf>,
    /// Worker threads; overrides the config and the environment.
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_list<T: std::str::FromStr>(s: &str) -> anyhow::Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| anyhow!("cannot parse {x:?} in list {s:?}")))
        .collect()
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())).into())
}

fn decision_json(log_e: LogValue<f64>, alpha: f64) -> anyhow::Result<Value> {
    Ok(json!({
        "log_e": log_e,
        "e": log_e.exp(),
        "alpha": alpha,
        "decision": decide(log_e, alpha)?,
        "post_hoc_level": post_hoc_level(log_e),
    }))
}

fn report_json(report: &EValueReport<f64>, alpha: f64, inputs: Value) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(report)?;
    let extra = decision_json(report.log_e, alpha)?;
    let obj = v.as_object_mut().expect("report is an object");
    for (key, value) in extra.as_object().expect("object") {
        obj.insert(key.clone(), value.clone());
    }
    obj.insert("inputs".into(), inputs);
    Ok(v)
}

fn run_test(args: &TestArgs) -> anyhow::Result<Value> {
    let format = match &args.format {
        Some(f) => f.parse()?,
        None => TableFormat::from_path(&args.table)?,
    };
    let table = parse_table(&args.table, format)?;
    let mut cfg = RunConfig::new(args.priors.specs()?, table.sizes());
    cfg.scale = args.scale;
    cfg.solver = args.solver.settings();
    cfg.validate()?;
    evaluate_table(&table, &cfg, args.statistic, args.palt.as_deref(), args.alpha)
}

fn evaluate_table(
    table: &Table,
    cfg: &RunConfig<f64>,
    statistic: StatisticArg,
    palt: Option<&str>,
    alpha: f64,
) -> anyhow::Result<Value> {
    let sizes = table.sizes();
    let specs = cfg.specs_for(sizes.len())?;
    let report = match statistic {
        StatisticArg::Mic => log_e_gro_mic(table, &specs)?,
        StatisticArg::Pseudo => {
            let d = pseudo_null_density(&specs, &sizes, cfg.scale)?;
            Statistic::pseudo(&specs, &sizes, &d)?.report(table)?
        }
        StatisticArg::Can => {
            let sol = solve_canonical(&specs, &sizes, &cfg.solver)?;
            Statistic::gro_can(&specs, &sizes, &sol)?.report(table)?
        }
        StatisticArg::Point => {
            let p = MeanParams::new(parse_list(palt.ok_or_else(|| anyhow!("--statistic point needs --palt"))?)?)?;
            let sol = solve_point(&p, &sizes, &cfg.solver)?;
            Statistic::gro_point(&p, &sizes, &sol)?.report(table)?
        }
    };
    let inputs = json!({
        "table": serde_json::from_str::<Value>(&table_to_json(table))?,
        "priors": specs.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    });
    report_json(&report, alpha, inputs)
}

fn run_epower(args: &DesignArgs) -> anyhow::Result<Value> {
    let (cfg, specs) = args.config()?;
    let sizes = &cfg.sizes;
    let reference = Reference::alternative(&specs, sizes)?;
    let mic = e_power_factorized(&Statistic::gro_mic(&specs, sizes)?, &reference)?;
    let sol = solve_canonical(&specs, sizes, &cfg.solver)?;
    let can = e_power_factorized(&Statistic::gro_can(&specs, sizes, &sol)?, &reference)?;
    let density = pseudo_null_density(&specs, sizes, cfg.scale)?;
    let pseudo = e_power_factorized(&Statistic::pseudo(&specs, sizes, &density)?, &reference)?;
    let slack = (can - mic).min(pseudo - can);
    Ok(json!({
        "sizes": sizes,
        "priors": specs.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "mic": mic,
        "can": can,
        "pseudo": pseudo,
        "sandwich_slack": slack,
        "sandwich_holds": slack >= -1e-8,
        "achieved_kl": sol.achieved_kl,
        "solver_iterations": sol.iterations,
        "scale": cfg.scale,
    }))
}

fn run_gap(args: &DesignArgs) -> anyhow::Result<Value> {
    let (cfg, specs) = args.config()?;
    let density = pseudo_null_density(&specs, &cfg.sizes, cfg.scale)?;
    let mut report = gap_r(&specs, &cfg.sizes, &density)?;
    if !args.per_point {
        report.per_point = None;
    }
    let mut v = serde_json::to_value(&report)?;
    v["scale"] = json!(cfg.scale);
    Ok(v)
}

fn run_rprime(args: &RprimeArgs) -> anyhow::Result<Value> {
    let (mut cfg, specs) = args.design.config()?;
    cfg.bounds = (args.lo, args.hi);
    cfg.grid_step = args.step;
    cfg.validate()?;
    let density = pseudo_null_density(&specs, &cfg.sizes, cfg.scale)?;
    let base = json!({
        "sizes": cfg.sizes,
        "priors": specs.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "scale": cfg.scale,
    });
    let mut v = base;
    if args.worst_case {
        let (max, argmax) = worst_case_r_prime(&specs, &cfg.sizes, &density, cfg.grid_step, cfg.bounds)?;
        v["r_prime"] = json!(max);
        v["argmax"] = serde_json::to_value(argmax)?;
        v["bounds"] = json!(cfg.bounds);
        v["grid_step"] = json!(cfg.grid_step);
    } else {
        let p = MeanParams::new(parse_list(args.palt.as_deref().ok_or_else(|| anyhow!("give --palt or --worst-case"))?)?)?;
        v["r_prime"] = json!(gap_r_prime(&p, &specs, &cfg.sizes, &density)?);
        v["p_alt"] = serde_json::to_value(p)?;
    }
    Ok(v)
}

fn run_regret(args: &RegretArgs) -> anyhow::Result<Value> {
    let ms: Vec<usize> = parse_list(&args.ms)?;
    let mut curves = Vec::new();
    for p in &args.palt {
        let p = MeanParams::new(parse_list(p)?)?;
        let mut cfg = RunConfig::new(args.priors.specs()?, vec![ms.iter().copied().max().unwrap_or(0); p.len()]);
        cfg.solver = args.solver.settings();
        cfg.validate()?;
        let specs = cfg.specs_for(p.len())?;
        curves.push(regret_curve(&p, &specs, &ms, &cfg.solver)?);
    }
    Ok(json!({ "curves": curves }))
}

fn run_theorem1(args: &Theorem1Args) -> anyhow::Result<Value> {
    let spec: PriorSpec<f64> = args.prior.parse()?;
    let cells = theorem1_cells(&spec, args.m, args.bins)?;
    Ok(json!({
        "prior": spec.to_string(),
        "m": args.m,
        "bins": args.bins,
        "tv": cells.tv,
        "marginal": cells.marginal,
        "limit": cells.prior,
    }))
}

fn run_continue(args: &ContinueArgs) -> anyhow::Result<Value> {
    let mut log_es = Vec::new();
    for v in &args.values {
        let log_e = match v.parse::<f64>() {
            Ok(e) if e >= 0.0 => LogValue::new(e.ln())?,
            Ok(e) => bail!("e-values are nonnegative, got {e}"),
            Err(_) => {
                let report: Value = serde_json::from_str(&read(Path::new(v))?)
                    .with_context(|| format!("{v} is neither a number nor a JSON report"))?;
                match &report["log_e"] {
                    Value::Null => LogValue::zero_mass(),
                    Value::Number(x) => LogValue::new(x.as_f64().expect("finite"))?,
                    _ => bail!("{v} has no numeric log_e field"),
                }
            }
        };
        log_es.push(log_e);
    }
    let combined = combine_evalues(&log_es)?;
    let mut out = decision_json(combined, args.alpha)?;
    out["batches"] = json!(log_es.len());
    Ok(out)
}

fn run_net_test(args: &NetTestArgs) -> anyhow::Result<Value> {
    let net = match (&args.biadjacency, &args.edges, &args.partition, args.mode) {
        (Some(b), _, _, _) => NetworkInput::from_biadjacency_csv(&read(b)?)?,
        (None, Some(e), Some(p), Some(mode)) => {
            let mode = match mode {
                ModeArg::SbmUndirected => NetworkMode::SbmVsErUndirected,
                ModeArg::SbmDirected => NetworkMode::SbmVsErDirected,
                ModeArg::PcmBipartite => NetworkMode::PcmVsErBipartite,
            };
            NetworkInput::from_csv(&read(e)?, &read(p)?, mode)?
        }
        _ => bail!("give --biadjacency or --edges, --partition and --mode"),
    };
    let groups = network_groups(&net)?;
    let table = network_to_table(&net)?;
    let cfg = RunConfig::new(args.priors.specs()?, table.sizes());
    cfg.validate()?;
    let mut v = evaluate_table(&table, &cfg, StatisticArg::Mic, None, args.alpha)?;
    v["inputs"]["groups"] = serde_json::to_value(groups)?;
    v["inputs"]["mode"] = serde_json::to_value(net.mode)?;
    Ok(v)
}

fn run_sweep(args: &SweepArgs) -> anyhow::Result<Value> {
    let mut cfg: SweepConfig<f64> =
        serde_json::from_str(&read(&args.config)?).map_err(|e| Error::Parse(e.to_string()))?;
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    let result = sweep(&cfg)?;
    if let Some(path) = &args.tsv {
        std::fs::write(path, result.to_tsv()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(serde_json::to_value(result)?)
}

fn run(cli: &Cli) -> anyhow::Result<Value> {
    match &cli.command {
        Command::Test(a) => run_test(a),
        Command::Epower(a) => run_epower(a),
        Command::Gap(a) => run_gap(a),
        Command::Rprime(a) => run_rprime(a),
        Command::Regret(a) => run_regret(a),
        Command::Theorem1(a) => run_theorem1(a),
        Command::Continue(a) => run_continue(a),
        Command::NetTest(a) => run_net_test(a),
        Command::Sweep(a) => run_sweep(a),
    }
}

fn error_json(err: &anyhow::Error) -> Value {
    let code = err.downcast_ref::<Error>().map_or("error", |e| e.code());
    json!({ "error": { "code": code, "message": format!("{err:#}") } })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = run(&cli).and_then(|v| {
        let text = serde_json::to_string_pretty(&v)? + "\n";
        match &cli.output {
            Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?,
            None => print!("{text}"),
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}

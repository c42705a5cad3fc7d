//! `qwalk`: command-line runner for the search and communication experiments.
//!
//! Every command writes CSV/JSON files into `--out` (default `.`) and prints
//! the paths it wrote. Identical arguments give byte-identical files.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qwalk::dynamics::{default_t_max, DEFAULT_STEPS};
use qwalk::ensemble::{run_ensemble, EnsembleConfig, EnsembleTask, GraphSpec};
use qwalk::experiments::{figure1, figure2, Figure1Config, Figure2Config, DEFAULT_SEED, FIGURE1_P};
use qwalk::graph::Graph;
use qwalk::io::{json_string, write_text};
use qwalk::par::Execution;
use qwalk::protocols::{
    bell_leakage, default_protocol_t_max, first_independent_triple, first_non_adjacent_pair,
    predicted_time, run_bell_with, run_transfer_with, ProtocolKind, ProtocolSpec,
    ProtocolSummary,
};
use qwalk::search::{
    check_optimality_condition, choose_gamma, run_search_with, search_report, GammaMode,
    SearchInstance, DEFAULT_MARGIN,
};
use qwalk::spectra::{eigendecompose, empirical_bulk_density, spectral_report_from};

use config::ConfigFile;

/// Exit status when an ensemble finished but some instances failed.
const EXIT_PARTIAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Quantum walk search and communication on random graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a random graph and write it as JSON and as an edge list.
    Generate(GenerateArgs),
    /// Adjacency spectrum, spectral report and bulk histogram.
    Spectrum(SpectrumArgs),
    /// Run the search for a marked vertex.
    Search(SearchArgs),
    /// State transfer between two nodes.
    Transfer(TransferArgs),
    /// Bell pair between two nodes mediated by a third.
    Bell(BellArgs),
    /// Statistics over independent random instances.
    Ensemble(EnsembleArgs),
    /// Search on G(n, p) for several p, with the search Hamiltonian spectrum.
    Figure1(Figure1Args),
    /// State transfer on a small G(n, p).
    Figure2(Figure2Args),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Number of vertices.
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (Erdős–Rényi).
    #[arg(long)]
    p: Option<f64>,
    /// Degree (random regular).
    #[arg(long)]
    d: Option<usize>,
    /// Graph model: er, regular or complete. Inferred from --p / --d when omitted.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// exact, meanfield or manual:<x>.
    #[arg(long)]
    gamma: Option<String>,
    /// End of the time window.
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of time grid points.
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    /// Histogram bins for the bulk density.
    #[arg(long)]
    bins: Option<usize>,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    common: Common,
    /// Marked vertex.
    #[arg(long)]
    w: Option<usize>,
}

#[derive(Args, Debug)]
struct TransferArgs {
    #[command(flatten)]
    common: Common,
    /// Sender.
    #[arg(long)]
    i: Option<usize>,
    /// Receiver.
    #[arg(long)]
    j: Option<usize>,
}

#[derive(Args, Debug)]
struct BellArgs {
    #[command(flatten)]
    common: Common,
    /// Mediating node.
    #[arg(long)]
    w: Option<usize>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    #[command(flatten)]
    common: Common,
    /// spectrum, search, transfer or bell.
    #[arg(long)]
    task: Option<String>,
    /// Number of instances.
    #[arg(long)]
    size: Option<usize>,
    /// Marked vertex for the search task.
    #[arg(long)]
    w: Option<usize>,
}

#[derive(Args, Debug)]
struct Figure1Args {
    #[command(flatten)]
    common: Common,
    /// Comma-separated edge probabilities.
    #[arg(long)]
    p_list: Option<String>,
    /// Marked vertex.
    #[arg(long)]
    w: Option<usize>,
}

#[derive(Args, Debug)]
struct Figure2Args {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    j: Option<usize>,
}

/// Command-line flags merged with the optional config file.
struct Ctx<'a> {
    common: &'a Common,
    file: ConfigFile,
}

impl<'a> Ctx<'a> {
    fn new(common: &'a Common) -> Result<Self> {
        let file = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(Ctx { common, file })
    }

    fn n(&self) -> Result<usize> {
        let n = self.file.require("n", self.common.n)?;
        if n == 0 {
            bail!("invalid parameter `n`: must be positive");
        }
        Ok(n)
    }

    fn n_or(&self, default: usize) -> Result<usize> {
        Ok(self.file.get("n", self.common.n)?.unwrap_or(default))
    }

    fn p(&self) -> Result<Option<f64>> {
        self.file.get("p", self.common.p)
    }

    fn seed(&self) -> Result<Option<u64>> {
        self.file.get("seed", self.common.seed)
    }

    fn gamma(&self) -> Result<Option<GammaMode>> {
        self.file.get("gamma", self.common.gamma.clone())?
            .map(|s: String| s.parse::<GammaMode>().map_err(anyhow::Error::from))
            .transpose()
    }

    fn tmax(&self) -> Result<Option<f64>> {
        self.file.get("tmax", self.common.tmax)
    }

    fn steps(&self) -> Result<usize> {
        Ok(self.file.get("steps", self.common.steps)?.unwrap_or(DEFAULT_STEPS))
    }

    fn out(&self) -> Result<PathBuf> {
        let out = self
            .file
            .get::<PathBuf>("out", self.common.out.clone())?
            .unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&out)
            .with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(out)
    }

    fn jobs(&self) -> Result<Option<usize>> {
        let jobs = self.file.get("jobs", self.common.jobs)?;
        if jobs == Some(0) {
            bail!("invalid parameter `jobs`: must be at least 1");
        }
        Ok(jobs)
    }

    fn usize_key(&self, key: &str, flag: Option<usize>) -> Result<Option<usize>> {
        self.file.get(key, flag)
    }

    fn graph_spec(&self) -> Result<GraphSpec> {
        let n = self.n()?;
        let p = self.p()?;
        let d: Option<usize> = self.file.get("d", self.common.d)?;
        let model: Option<String> = self.file.get("model", self.common.model.clone())?;
        let model = match model.as_deref() {
            Some(m) => m.to_owned(),
            None if d.is_some() && p.is_some() => {
                bail!("both `p` and `d` given; choose one or set `model`")
            }
            None if d.is_some() => "regular".into(),
            None if p.is_some() => "er".into(),
            None => bail!("missing required parameter `p` (or `d`, or `model = complete`)"),
        };
        match model.as_str() {
            "er" | "erdos_renyi" => Ok(GraphSpec::ErdosRenyi {
                n,
                p: p.ok_or_else(|| anyhow!("missing required parameter `p`"))?,
            }),
            "regular" | "random_regular" => Ok(GraphSpec::RandomRegular {
                n,
                d: d.ok_or_else(|| anyhow!("missing required parameter `d`"))?,
            }),
            "complete" => Ok(GraphSpec::Complete { n }),
            other => bail!("invalid parameter `model`: unknown model `{other}` (expected er, regular or complete)"),
        }
    }

    fn graph(&self) -> Result<Graph> {
        let spec = self.graph_spec()?;
        let seed = self.seed()?.unwrap_or(DEFAULT_SEED);
        Ok(spec.generate(seed)?)
    }
}

fn execution() -> Execution {
    Execution::default()
}

struct Written {
    paths: Vec<PathBuf>,
}

impl Written {
    fn new() -> Self {
        Written { paths: Vec::new() }
    }

    fn text(&mut self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        let path = dir.join(name);
        write_text(&path, contents)?;
        self.paths.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, dir: &Path, name: &str, value: &T) -> Result<()> {
        self.text(dir, name, &json_string(value)?)
    }

    fn extend(&mut self, paths: Vec<PathBuf>) {
        self.paths.extend(paths);
    }

    fn print(&self) {
        for p in &self.paths {
            println!("wrote {}", p.display());
        }
    }
}

fn cmd_generate(args: &GenerateArgs) -> Result<u8> {
    let ctx = Ctx::new(&args.common)?;
    let g = ctx.graph()?;
    let out = ctx.out()?;
    let mut w = Written::new();
    w.text(&out, "graph.json", &g.to_json()?)?;
    w.text(&out, "graph.edges", &g.to_edge_list())?;
    println!(
        "{} graph: n = {}, edges = {}, connected = {}",
        g.model().as_str(),
        g.n(),
        g.edge_count(),
        qwalk::graph::is_connected(&g)
    );
    w.print();
    Ok(0)
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<u8> {
    let ctx = Ctx::new(&args.common)?;
    let g = ctx.graph()?;
    let bins = ctx.usize_key("bins", args.bins)?.unwrap_or(50);
    let mode = ctx.gamma()?.unwrap_or(GammaMode::MeanFieldInvNp);
    let spectrum = eigendecompose(g.adjacency_matrix().as_ref())?;
    let gamma = qwalk::search::choose_gamma_with(&g, mode, Some(&spectrum))?;
    let report = spectral_report_from(&g, &spectrum, gamma);
    let hist = empirical_bulk_density(&spectrum, bins)?;
    let out = ctx.out()?;
    let mut w = Written::new();
    w.text(&out, "spectrum.csv", &spectrum.to_csv())?;
    w.json(&out, "spectral_report.json", &report)?;
    w.text(&out, "histogram.csv", &hist.to_csv())?;
    println!(
        "lambda1 = {}, lambda2 = {}, c = {}, alpha = {}",
        report.lambda1, report.lambda2, report.ratio_c, report.alpha
    );
    w.print();
    Ok(0)
}

#[derive(Serialize)]
struct SearchOutput {
    #[serde(flatten)]
    report: qwalk::search::SearchReport,
    optimality: qwalk::search::OptimalityReport,
}

fn cmd_search(args: &SearchArgs) -> Result<u8> {
    let ctx = Ctx::new(&args.common)?;
    let g = ctx.graph()?;
    let n = g.n();
    let w_vertex = ctx.usize_key("w", args.w)?.unwrap_or(0);
    let mode = ctx.gamma()?.unwrap_or(GammaMode::MeanFieldInvNp);
    let t_max = ctx.tmax()?.unwrap_or_else(|| default_t_max(n));
    let steps = ctx.steps()?;
    let si = SearchInstance::new(g, w_vertex, mode)?;
    let trace = run_search_with(&si, t_max, steps, execution())?;
    let report = search_report(&si, &trace)?;
    let optimality = check_optimality_condition(si.graph(), si.gamma(), DEFAULT_MARGIN)?;
    let out = ctx.out()?;
    let mut w = Written::new();
    w.text(&out, "search_trace.csv", &trace.to_csv("probability"))?;
    w.json(&out, "search_report.json", &SearchOutput { report: report.clone(), optimality })?;
    println!(
        "peak P_w = {} at t = {} (two-level estimate {})",
        report.peak_value, report.peak_time, report.two_level_peak_time
    );
    w.print();
    Ok(0)
}

fn protocol_gamma(ctx: &Ctx, spec: ProtocolSpec) -> Result<ProtocolSpec> {
    match ctx.gamma()? {
        None | Some(GammaMode::MeanFieldInvNp) => Ok(spec),
        Some(mode) => {
            let gamma = choose_gamma(&spec.graph, mode)?;
            Ok(spec.with_gamma(gamma)?)
        }
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_transfer(args: &TransferArgs) -> Result<u8> {
    let ctx = Ctx::new(&args.common)?;
    let g = ctx.graph()?;
    let n = g.n();
    let (i, j) = match (ctx.usize_key("i", args.i)?, ctx.usize_key("j", args.j)?) {
        (Some(i), Some(j)) => (i, j),
        (None, None) => first_non_adjacent_pair(&g)
            .ok_or_else(|| anyhow!("graph has no non-adjacent pair; give `i` and `j`"))?,
        _ => bail!("give both `i` and `j`, or neither"),
    };
    let spec = protocol_gamma(&ctx, ProtocolSpec::transfer(g.clone(), i, j)?)?;
    let t_max = ctx
        .tmax()?
        .unwrap_or_else(|| default_protocol_t_max(ProtocolKind::Transfer, n));
    let res = run_transfer_with(&spec, t_max, ctx.steps()?, execution())?;
    print_warnings(&res.warnings);
    let out = ctx.out()?;
    let mut w = Written::new();
    w.text(&out, "transfer_trace.csv", &res.trace.to_csv("fidelity"))?;
    w.json(&out, "transfer.json", &res.summary(&g))?;
    println!(
        "transfer {i} -> {j}: fidelity {} at T = {}, peak {} at t = {}",
        res.fidelity_at_predicted_time, res.predicted_time, res.peak_fidelity, res.trace.peak_time
    );
    w.print();
    Ok(0)
}

#[derive(Serialize)]
struct BellOutput {
    #[serde(flatten)]
    summary: ProtocolSummary,
    /// Largest antisymmetric-channel probability up to the protocol time.
    antisymmetric_leakage: f64,
}

fn cmd_bell(args: &BellArgs) -> Result<u8> {
    let ctx = Ctx::new(&args.common)?;
    let g = ctx.graph()?;
    let n = g.n();
    let given = [
        ctx.usize_key("w", args.w)?,
        ctx.usize_key("a", args.a)?,
        ctx.usize_key("b", args.b)?,
    ];
    let (wv, a, b) = match given {
        [Some(w), Some(a), Some(b)] => (w, a, b),
        [None, None, None] => first_independent_triple(&g)
            .ok_or_else(|| anyhow!("graph has no pairwise non-adjacent triple; give `w`, `a` and `b`"))?,
        _ => bail!("give all of `w`, `a` and `b`, or none"),
    };
    let spec = protocol_gamma(&ctx, ProtocolSpec::bell(g.clone(), wv, a, b)?)?;
    let t_max = ctx
        .tmax()?
        .unwrap_or_else(|| default_protocol_t_max(ProtocolKind::Bell, n));
    let steps = ctx.steps()?;
    let res = run_bell_with(&spec, t_max, steps, execution())?;
    let leakage = bell_leakage(&spec, predicted_time(ProtocolKind::Bell, n), steps)?;
    print_warnings(&res.warnings);
    let out = ctx.out()?;
    let mut w = Written::new();
    w.text(&out, "bell_trace.csv", &res.trace.to_csv("fidelity"))?;
    w.json(
        &out,
        "bell.json",
        &BellOutput {
            summary: res.summary(&g),
            antisymmetric_leakage: leakage,
        },
    )?;
    println!(
        "bell ({a}, {b}) via {wv}: fidelity {} at T = {}, leakage {}",
        res.fidelity_at_predicted_time, res.predicted_time, leakage
    );
    w.print();
    Ok(0)
}

fn cmd_ensemble(args: &EnsembleArgs) -> Result<u8> {
    let ctx = Ctx::new(&args.common)?;
    let graph = ctx.graph_spec()?;
    let task: EnsembleTask = ctx
        .file
        .get::<String>("task", args.task.clone())?
        .unwrap_or_else(|| "spectrum".into())
        .parse()?;
    let size = ctx.file.require("size", args.size)?;
    let mut config = EnsembleConfig::new(graph, task, size, ctx.seed()?.unwrap_or(DEFAULT_SEED));
    if let Some(mode) = ctx.gamma()? {
        config.gamma_mode = mode;
    }
    config.w = ctx.usize_key("w", args.w)?.unwrap_or(0);
    config.t_max = ctx.tmax()?;
    config.steps = ctx.steps()?;
    let summary = run_ensemble(&config, execution())?;
    summary.verify()?;
    let out = ctx.out()?;
    let mut w = Written::new();
    w.text(&out, "ensemble_records.jsonl", &summary.records_jsonl()?)?;
    w.json(&out, "ensemble_summary.json", &summary.aggregate_file())?;
    for (key, s) in &summary.aggregate {
        println!("{key}: mean {} std {} min {} max {} (count {})", s.mean, s.std, s.min, s.max, s.count);
    }
    for r in summary.records.iter().filter(|r| r.error.is_some()) {
        eprintln!("instance {} (seed {}) failed: {}", r.index, r.seed, r.error.as_deref().unwrap_or(""));
    }
    w.print();
    Ok(if summary.failures > 0 { EXIT_PARTIAL } else { 0 })
}

fn parse_p_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("invalid value `{s}` in `p_list`: {e}"))
        })
        .collect()
}

fn cmd_figure1(args: &Figure1Args) -> Result<u8> {
    let ctx = Ctx::new(&args.common)?;
    let p_list = match ctx.file.get::<String>("p_list", args.p_list.clone())? {
        Some(text) => parse_p_list(&text)?,
        None => match ctx.p()? {
            Some(p) => vec![p],
            None => FIGURE1_P.to_vec(),
        },
    };
    let mut cfg = Figure1Config {
        n: ctx.n_or(1000)?,
        p_list,
        seed: ctx.seed()?.unwrap_or(DEFAULT_SEED),
        w: ctx.usize_key("w", args.w)?.unwrap_or(0),
        t_max: ctx.tmax()?,
        steps: ctx.steps()?,
        ..Default::default()
    };
    if let Some(mode) = ctx.gamma()? {
        cfg.gamma_mode = mode;
    }
    let panels = figure1(&cfg, execution())?;
    let out = ctx.out()?;
    let mut w = Written::new();
    for panel in &panels {
        w.extend(panel.write(&out)?);
        println!(
            "p = {}: peak P_w = {} at t = {}, max deviation {}, lowest pair isolated: {}",
            panel.p,
            panel.report.peak_value,
            panel.report.peak_time,
            panel.max_deviation(),
            panel.separation.isolated
        );
    }
    w.print();
    Ok(0)
}

fn cmd_figure2(args: &Figure2Args) -> Result<u8> {
    let ctx = Ctx::new(&args.common)?;
    let endpoints = match (ctx.usize_key("i", args.i)?, ctx.usize_key("j", args.j)?) {
        (Some(i), Some(j)) => Some((i, j)),
        (None, None) => None,
        _ => bail!("give both `i` and `j`, or neither"),
    };
    let gamma = match ctx.gamma()? {
        Some(GammaMode::Manual(x)) => Some(x),
        None | Some(GammaMode::MeanFieldInvNp) => None,
        Some(GammaMode::ExactInverseLambda1) => {
            bail!("invalid parameter `gamma`: figure2 supports meanfield or manual:<x>")
        }
    };
    let cfg = Figure2Config {
        n: ctx.n_or(100)?,
        p: ctx.p()?.unwrap_or(0.2),
        seed: ctx.seed()?.unwrap_or(DEFAULT_SEED),
        endpoints,
        gamma,
        t_max: ctx.tmax()?,
        steps: ctx.steps()?,
    };
    let output = figure2(&cfg, execution())?;
    print_warnings(&output.result.warnings);
    let out = ctx.out()?;
    let mut w = Written::new();
    w.extend(output.write(&out)?);
    let s = output.summary();
    println!(
        "transfer fidelity {} at T = {}, peak {} at t = {}",
        s.fidelity_at_predicted_time, s.predicted_time, s.peak_fidelity, s.peak_time
    );
    w.print();
    Ok(0)
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Generate(a) => &a.common,
        Command::Spectrum(a) => &a.common,
        Command::Search(a) => &a.common,
        Command::Transfer(a) => &a.common,
        Command::Bell(a) => &a.common,
        Command::Ensemble(a) => &a.common,
        Command::Figure1(a) => &a.common,
        Command::Figure2(a) => &a.common,
    }
}

fn dispatch(cmd: &Command) -> Result<u8> {
    match cmd {
        Command::Generate(a) => cmd_generate(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Search(a) => cmd_search(a),
        Command::Transfer(a) => cmd_transfer(a),
        Command::Bell(a) => cmd_bell(a),
        Command::Ensemble(a) => cmd_ensemble(a),
        Command::Figure1(a) => cmd_figure1(a),
        Command::Figure2(a) => cmd_figure2(a),
    }
}

#[cfg(feature = "parallel")]
fn run(cmd: &Command) -> Result<u8> {
    let jobs = Ctx::new(common(cmd))?.jobs()?;
    match jobs {
        None => dispatch(cmd),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .context("starting worker threads")?;
            pool.install(|| dispatch(cmd))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn run(cmd: &Command) -> Result<u8> {
    Ctx::new(common(cmd))?.jobs()?;
    dispatch(cmd)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

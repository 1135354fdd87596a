use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polldyn::chaos::{
    ChaosModelConfig, CollaborationFunction, CollaborationModel, ExactTent, Normalization, SafetyFunction, VbConvention,
};
use polldyn::cpd::{grid_points, iterate, orbits_from, perturbed_lr_map, Dynamics, Fallback, IterateOptions, XzMap};
use polldyn::culture::{Culture, CultureSpec};
use polldyn::entropy::{detect_eventual_period, ks_entropy_estimate, ks_profile, winners_word};
use polldyn::exec::Execution;
use polldyn::io::{export_dot, parse_electorate, write_grid_csv, write_orbit_csv, write_profile_csv};
use polldyn::montecarlo::{run_condition_with, write_csv};
use polldyn::pd::{build_pd_graph, classify, DynamicsReport, PdGraph};
use polldyn::social::condorcet_analysis;
use polldyn::{Electorate, Error, Result, StrategyTag};

#[derive(Parser)]
#[command(name = "polldyn", version, about = "Iterated approval voting dynamics")]
struct Cli {
    /// Run data-parallel loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Condorcet report and PD graph summary of an electorate file.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Grey out transient states not reached after this many steps.
        #[arg(long)]
        unreachable: Option<usize>,
    },
    /// PD graph as DOT, to a file or stdout.
    Graph {
        file: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        unreachable: Option<usize>,
    },
    /// Frequency of Condorcet winners and bad dynamics over random electorates.
    Mc(McArgs),
    /// Orbit of a continuous model.
    CpdOrbit {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        discard: usize,
        #[arg(long, default_value_t = 1)]
        every: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropy profile of the winners word of a continuous model.
    Entropy {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1 << 20)]
        steps: usize,
        /// Letters dropped before the word starts.
        #[arg(long, default_value_t = 0)]
        discard: usize,
        #[arg(long, default_value_t = 16)]
        lmax: usize,
        /// Fit range `lo:hi`.
        #[arg(long, default_value = "4:14")]
        fit: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Orbits from the cell centres of a square grid.
    Grid {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 200)]
        res: usize,
        #[arg(long, default_value_t = 8)]
        iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    culture: Culture,
    /// Dimension of the spatial culture.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    strategy: StrategyTag,
    #[arg(long, default_value_t = 6)]
    candidates: usize,
    #[arg(long, default_value_t = 20)]
    types: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    /// Perturbed leader rule on the four-type three-candidate electorate.
    #[value(alias = "thm4")]
    Perturbed,
    /// Reduced safety and collaboration model.
    #[value(alias = "section7")]
    Collaboration,
    /// Exact tent map.
    Tent,
}

#[derive(Clone, Copy, ValueEnum)]
enum Collab {
    Linear,
    Rational,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Adjusting share (perturbed).
    #[arg(long, default_value_t = 0.85)]
    p: f64,
    /// Margin threshold as a share of the electorate (perturbed).
    #[arg(long, default_value_t = 0.04)]
    theta: f64,
    /// Behaviour below the margin threshold: keep, apply or half (perturbed).
    #[arg(long, default_value = "keep")]
    fallback: Fallback,
    #[arg(long, default_value = "derived")]
    vb: VbConvention,
    #[arg(long, default_value = "total")]
    norm: Normalization,
    /// Slope of the collaboration function (collaboration).
    #[arg(long, default_value_t = 5.0)]
    kappa: f64,
    #[arg(long, value_enum, default_value_t = Collab::Linear)]
    collab: Collab,
    /// Weights of Z, Y, X, W (collaboration).
    #[arg(long, default_value = "3,1,3,5")]
    weights: String,
    /// Starting point `x,z`; the tent model reads the last value.
    #[arg(long)]
    start: Option<String>,
}

enum Model {
    Perturbed(XzMap),
    Collaboration(CollaborationModel),
    Tent(ExactTent),
}

fn floats(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{what}: `{t}` is not a number")))
        })
        .collect()
}

impl ModelArgs {
    fn build(&self) -> Result<Model> {
        Ok(match self.model {
            ModelKind::Perturbed => Model::Perturbed(XzMap::new(perturbed_lr_map(
                &polldyn::fixtures::perturbed_cycle(),
                self.p,
                self.theta,
                self.fallback,
            )?)?),
            ModelKind::Collaboration => {
                let w = floats(&self.weights, "--weights")?;
                let [n_z, n_y, n_x, n_w] = w[..] else {
                    return Err(Error::InvalidArgument("--weights takes four values".into()));
                };
                let collaboration = match self.collab {
                    Collab::Linear => CollaborationFunction::LinearClamped(self.kappa),
                    Collab::Rational => CollaborationFunction::Rational(self.kappa),
                };
                Model::Collaboration(CollaborationModel::new(ChaosModelConfig {
                    n_z,
                    n_y,
                    n_x,
                    n_w,
                    safety: SafetyFunction {
                        normalization: self.norm,
                        ..SafetyFunction::default()
                    },
                    collaboration,
                    vb: self.vb,
                })?)
            }
            ModelKind::Tent => Model::Tent(ExactTent::default()),
        })
    }

    fn start(&self) -> Result<Vec<f64>> {
        let default = match self.model {
            ModelKind::Perturbed => "0.99,0.99",
            ModelKind::Collaboration => "0.5,0.5",
            ModelKind::Tent => "0.123456789",
        };
        floats(self.start.as_deref().unwrap_or(default), "--start")
    }
}

/// Dynamics started from reduced coordinates.
trait Start: Dynamics {
    fn start_state(&self, v: &[f64]) -> Result<Self::State>;
}

fn xz(v: &[f64]) -> Result<(f64, f64)> {
    match *v {
        [x, z] if (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&z) => Ok((x, z)),
        _ => Err(Error::InvalidArgument(
            "start must be `x,z` within the unit square".into(),
        )),
    }
}

impl Start for XzMap {
    fn start_state(&self, v: &[f64]) -> Result<Self::State> {
        let (x, z) = xz(v)?;
        self.state(x, z)
    }
}

impl Start for CollaborationModel {
    fn start_state(&self, v: &[f64]) -> Result<Self::State> {
        let (x, z) = xz(v)?;
        Ok([x, z])
    }
}

impl Start for ExactTent {
    fn start_state(&self, v: &[f64]) -> Result<Self::State> {
        let z = *v.last().ok_or_else(|| Error::InvalidArgument("empty start".into()))?;
        self.state_from_f64(z)
    }
}

macro_rules! with_model {
    ($model:expr, $map:ident => $body:expr) => {
        match $model {
            Model::Perturbed($map) => $body,
            Model::Collaboration($map) => $body,
            Model::Tent($map) => $body,
        }
    };
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(file: &Path) -> Result<Electorate> {
    parse_electorate(&std::fs::read_to_string(file)?)
}

fn cycle_summary(e: &Electorate, report: &DynamicsReport) -> Vec<String> {
    report
        .cycles
        .iter()
        .map(|c| {
            let quality = match c.bad {
                Some(true) => "bad ",
                Some(false) => "good ",
                None => "",
            };
            if c.is_fixed_point() {
                format!("{quality}fixed point {}", c.states[0].label(e))
            } else {
                let states: Vec<String> = c.states.iter().map(|s| s.label(e)).collect();
                format!("{quality}{}-cycle {{{}}}", c.period(), states.join(", "))
            }
        })
        .collect()
}

fn write_dot(
    graph: &PdGraph,
    e: &Electorate,
    report: &DynamicsReport,
    k: Option<usize>,
    path: Option<&Path>,
) -> Result<()> {
    let mut out = output(path)?;
    out.write_all(export_dot(graph, e, Some(report), k).as_bytes())?;
    out.flush()?;
    Ok(())
}

fn analyze(file: &Path, dot: Option<&Path>, unreachable: Option<usize>) -> Result<()> {
    let e = load(file)?;
    let set = e.candidates();
    let social = condorcet_analysis(&e);
    let graph = build_pd_graph(&e)?;
    let report = classify(&graph, &social);

    let mut head = vec![format!(
        "Condorcet winner: {}",
        social.condorcet_winner.map_or("none", |c| set.name(c))
    )];
    if let Some(c) = social.consensual_loser() {
        head.push(format!("consensual loser: {}", set.name(c)));
    }
    head.extend(cycle_summary(&e, &report));
    let mut o = io::stdout().lock();
    writeln!(o, "{}\n", head.join("; "))?;
    writeln!(o, "types:")?;
    for t in e.types() {
        writeln!(
            o,
            "  {} {} {} {}",
            t.name,
            t.preference.display(set),
            t.weight,
            t.strategy.short_name()
        )?;
    }
    if let Some(l) = social.condorcet_loser {
        writeln!(o, "Condorcet loser: {}", set.name(l))?;
    }
    if let Some(order) = &social.condorcet_order {
        writeln!(o, "Condorcet order: {}", set.word(order.iter().copied()))?;
    }
    writeln!(o, "states: {}", graph.n_states())?;
    for (c, line) in report.cycles.iter().zip(cycle_summary(&e, &report)) {
        writeln!(o, "  {line}: basin {}/{}", c.basin_size, graph.n_states())?;
        for s in &c.states {
            writeln!(o, "    {} -> {}", s.label(&e), graph.scores(*s).display(set))?;
        }
    }
    let verdict = match report.is_bad() {
        polldyn::pd::Verdict::Bad => "bad",
        polldyn::pd::Verdict::Good => "good",
        polldyn::pd::Verdict::Undefined => "undefined (no Condorcet winner)",
    };
    writeln!(o, "dynamics: {verdict}")?;
    o.flush()?;
    if let Some(p) = dot {
        write_dot(&graph, &e, &report, unreachable, Some(p))?;
    }
    Ok(())
}

fn graph(file: &Path, dot: Option<&Path>, unreachable: Option<usize>) -> Result<()> {
    let e = load(file)?;
    let graph = build_pd_graph(&e)?;
    let report = classify(&graph, &condorcet_analysis(&e));
    write_dot(&graph, &e, &report, unreachable, dot)
}

fn mc(a: &McArgs, exec: Execution) -> Result<()> {
    let culture = match (a.culture, a.dim) {
        (Culture::Spatial { .. }, Some(0)) => return Err(Error::InvalidArgument("--dim must be positive".into())),
        (Culture::Spatial { .. }, Some(dim)) => Culture::Spatial { dim },
        (Culture::Impartial, Some(_)) => {
            return Err(Error::InvalidArgument(
                "--dim only applies to the spatial culture".into(),
            ))
        }
        (c, None) => c,
    };
    let spec = CultureSpec {
        culture,
        n_candidates: a.candidates,
        n_types: a.types,
        strategy: a.strategy,
        seed: a.seed,
    };
    let r = run_condition_with(&spec, a.trials, exec)?;
    let mut out = output(a.out.as_deref())?;
    write_csv(std::slice::from_ref(&r), &mut out)?;
    out.flush()?;
    let bad = r.bad_rate().map_or("n/a".to_string(), |b| format!("{b:.4}"));
    eprintln!(
        "{} {}: cw_rate {:.4}, bad_rate {bad}, {} resamples, {:.2?}",
        spec.culture,
        spec.strategy,
        r.cw_rate(),
        r.counts.resamples,
        r.runtime
    );
    Ok(())
}

fn cpd_orbit(m: &ModelArgs, steps: usize, opts: IterateOptions, out: Option<&Path>) -> Result<()> {
    let start = m.start()?;
    with_model!(&m.build()?, map => {
        let s0 = map.start_state(&start)?;
        let orbit = iterate(map, &s0, steps, opts);
        let mut w = output(out)?;
        write_orbit_csv(map, &orbit, &mut w)?;
        w.flush()?;
        Ok(())
    })
}

fn parse_fit(s: &str) -> Result<(usize, usize)> {
    s.split_once(':')
        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
        .ok_or_else(|| Error::InvalidArgument(format!("--fit expects `lo:hi`, got `{s}`")))
}

struct EntropyOpts<'a> {
    steps: usize,
    discard: usize,
    lmax: usize,
    fit: &'a str,
    out: Option<&'a Path>,
}

fn entropy(m: &ModelArgs, o: EntropyOpts<'_>, exec: Execution) -> Result<()> {
    let (lo, hi) = parse_fit(o.fit)?;
    let start = m.start()?;
    let word = with_model!(&m.build()?, map => {
        let mut s = map.start_state(&start)?;
        for _ in 0..o.discard {
            s = map.step(&s);
        }
        winners_word(map, &s, o.steps)
    });
    let profile = ks_profile(&word, word.len(), o.lmax, exec)?;
    let fit = ks_entropy_estimate(&profile, lo, hi)?;
    if let Some(path) = o.out {
        let mut w = output(Some(path))?;
        write_profile_csv(&profile, &mut w)?;
        w.flush()?;
    }
    let mut o = io::stdout().lock();
    writeln!(o, "letters: {}", word.len())?;
    writeln!(o, "slope: {:.6}", fit.slope)?;
    writeln!(o, "intercept: {:.6}", fit.intercept)?;
    writeln!(o, "residual: {:.6}", fit.residual)?;
    if fit.low_confidence {
        writeln!(o, "warning: points are poorly aligned, the slope is unreliable")?;
    }
    if profile.undersampled {
        writeln!(o, "warning: long blocks are undersampled")?;
    }
    match detect_eventual_period(&word) {
        Some((pre, p)) => writeln!(o, "eventually periodic: period {p} after {pre} letters"),
        None if fit.eventually_periodic_suspected => writeln!(o, "eventually periodic: suspected, not detected"),
        None => writeln!(o, "eventually periodic: no"),
    }?;
    o.flush()?;
    Ok(())
}

fn grid(m: &ModelArgs, res: usize, iters: usize, out: Option<&Path>, exec: Execution) -> Result<()> {
    if res == 0 {
        return Err(Error::InvalidArgument("--res must be positive".into()));
    }
    let pts = grid_points(res);
    let mut w = output(out)?;
    match &m.build()? {
        Model::Perturbed(map) => {
            let starts = pts.iter().map(|&(x, z)| map.state(x, z)).collect::<Result<Vec<_>>>()?;
            write_grid_csv(map, &pts, &orbits_from(map, &starts, iters, exec), &mut w)?;
        }
        Model::Collaboration(map) => {
            let starts: Vec<[f64; 2]> = pts.iter().map(|&(x, z)| [x, z]).collect();
            write_grid_csv(map, &pts, &orbits_from(map, &starts, iters, exec), &mut w)?;
        }
        Model::Tent(_) => return Err(Error::InvalidArgument("grid needs a two-dimensional model".into())),
    }
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Analyze { file, dot, unreachable } => analyze(file, dot.as_deref(), *unreachable),
        Command::Graph { file, dot, unreachable } => graph(file, dot.as_deref(), *unreachable),
        Command::Mc(a) => mc(a, exec),
        Command::CpdOrbit {
            model,
            steps,
            discard,
            every,
            out,
        } => cpd_orbit(
            model,
            *steps,
            IterateOptions {
                discard: *discard,
                every: *every,
            },
            out.as_deref(),
        ),
        Command::Entropy {
            model,
            steps,
            discard,
            lmax,
            fit,
            out,
        } => entropy(
            model,
            EntropyOpts {
                steps: *steps,
                discard: *discard,
                lmax: *lmax,
                fit,
                out: out.as_deref(),
            },
            exec,
        ),
        Command::Grid { model, res, iters, out } => grid(model, *res, *iters, out.as_deref(), exec),
    }
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::FAILURE,
                _ => ExitCode::from(2),
            }
        }
    }
}

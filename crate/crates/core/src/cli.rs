//! The `perfect-sample` command line.
//!
//! Every subcommand prints one JSON object to stdout. Flag errors exit with
//! status 2 and usage text on stderr; runtime errors exit with status 1 and
//! print `{"error": kind, "message": text}`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cftp::{cftp_sample, connection_diagnostic, fill_infinite_window, BackwardRun, CheckPolicy, DEFAULT_WINDOW_CAP};
use crate::chain::{reverse_kernel, DiscreteKernel, ProbabilityVector, ReversedKernel, ZeroMassPolicy};
use crate::coalescence::{FullTracking, MonotoneBounding, Tracker};
use crate::error::{Error, Result};
use crate::fill::{acceptance_curve, replication_seed, stream_rng, FillConfig, FillSampler, RetryPolicy, RunRecord, SeedSpec};
use crate::model_zoo::{mtf_process, mtf_stationary, random_walk_chain, toy_chain, MtfDetection, Preset, RequestWeights};
use crate::oracle::{bayes_consistency, exact_fill_report};
use crate::rules::{Monotonicity, TransitionRule};
use crate::spec_file::load_chain_spec;
use crate::stats::{chi_square_gof, independence_test, interruptibility_test, read_jsonl, state_counts, write_jsonl, DEFAULT_BUCKETS};

/// Largest state space for which sample counts and goodness of fit are reported.
const MAX_REPORTED_STATES: usize = 5040;

#[derive(Debug, Parser)]
#[command(name = "perfect-sample", version, about = "Perfect sampling for finite Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rejection sampler with backward runs and imputed drivers.
    Fill(FillArgs),
    /// Coupling from the past.
    Cftp(CftpArgs),
    /// Infinite-window variant of the rejection sampler.
    FillInf(FillInfArgs),
    /// Exact acceptance probability and output law of one attempt.
    Enumerate(EnumerateArgs),
    /// Exact identities linking the samplers on an enumerable instance.
    Check(CheckArgs),
    /// Monte Carlo acceptance probability against c, with t = ceil(c n^2).
    Curve(CurveArgs),
    /// Independence of output and runtime over a run log.
    TestInterrupt(TestInterruptArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleChoice {
    /// The preset's own rule, or the spec file's rule.
    Default,
    Monotone,
    Independent,
    InverseCdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TrackerChoice {
    /// Bounding when the rule is certified monotone, full tracking otherwise.
    Auto,
    Full,
    Bounding,
}

#[derive(Debug, Args)]
struct ChainArgs {
    /// `toy`, `walk:n`, `mtf:n`, or a chain-spec JSON file.
    #[arg(long, default_value = "toy")]
    chain: String,
    #[arg(long, value_enum, default_value_t = RuleChoice::Default)]
    rule: RuleChoice,
    #[arg(long, value_enum, default_value_t = TrackerChoice::Auto)]
    tracker: TrackerChoice,
    /// Comma-separated request weights for `mtf:n` (default uniform).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, env = "PS_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// JSON-lines log of every run.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RetryChoice {
    Fixed,
    Doubling,
}

#[derive(Debug, Args)]
struct FillArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    t: usize,
    /// Seed state, or `pi` to draw it from the stationary law.
    #[arg(long, default_value = "0")]
    z: String,
    #[arg(long, value_enum, default_value_t = RetryChoice::Doubling)]
    retry: RetryChoice,
    #[arg(long, default_value_t = crate::fill::DEFAULT_MAX_ATTEMPTS)]
    max_attempts: usize,
}

#[derive(Debug, Args)]
struct CftpArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value_t = DEFAULT_WINDOW_CAP)]
    window_cap: usize,
}

#[derive(Debug, Args)]
struct FillInfArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Seed state for X_0, or `pi`.
    #[arg(long, default_value = "pi")]
    z: String,
    #[arg(long, default_value = "powers-of-2", value_parser = ["powers-of-2", "every-t"])]
    policy: String,
    #[arg(long, default_value_t = DEFAULT_WINDOW_CAP)]
    window_cap: usize,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    z: usize,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[command(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 2)]
    t_max: usize,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// Must be `walk:n`.
    #[arg(long, default_value = "walk:16")]
    chain: String,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
    c_grid: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, env = "PS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TestInterruptArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BUCKETS)]
    buckets: usize,
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// A resolved chain and rule.
struct Model {
    label: String,
    kernel: Option<DiscreteKernel>,
    rev: Option<ReversedKernel>,
    rule: TransitionRule,
    rule_name: &'static str,
    mtf: Option<(MtfDetection, RequestWeights)>,
}

impl Model {
    fn load(args: &ChainArgs) -> CliResult<Model> {
        let preset = args.chain.parse::<Preset>().ok();
        if args.weights.is_some() && !matches!(preset, Some(Preset::Mtf(_))) {
            return Err(usage("--weights only applies to mtf:n chains"));
        }
        let (kernel, rule, rule_name) = match preset {
            Some(Preset::Mtf(n)) => {
                if !matches!(args.rule, RuleChoice::Default) {
                    return Err(usage("mtf chains only support the move-to-front rule"));
                }
                let weights = match &args.weights {
                    Some(w) if w.len() != n => return Err(usage(format!("--weights needs {n} values"))),
                    Some(w) => RequestWeights::new(w.clone())?,
                    None => RequestWeights::uniform(n)?,
                };
                let (rule, detection) = mtf_process(&weights);
                return Ok(Model {
                    label: args.chain.clone(),
                    kernel: None,
                    rev: None,
                    rule,
                    rule_name: "move-to-front",
                    mtf: Some((detection, weights)),
                });
            }
            Some(Preset::Toy) | Some(Preset::Walk(_)) => {
                let (kernel, monotone) = match preset {
                    Some(Preset::Walk(n)) => random_walk_chain(n)?,
                    _ => {
                        let toy = toy_chain();
                        (toy.kernel, toy.monotone)
                    }
                };
                match args.rule {
                    RuleChoice::Default | RuleChoice::Monotone => (kernel, monotone, "monotone"),
                    RuleChoice::Independent => {
                        let rule = TransitionRule::independent(&kernel);
                        (kernel, rule, "independent")
                    }
                    RuleChoice::InverseCdf => {
                        let rule = TransitionRule::inverse_cdf(&kernel, &(0..kernel.size()).collect::<Vec<_>>())?;
                        (kernel, rule, "inverse-cdf")
                    }
                }
            }
            None => {
                let path = Path::new(&args.chain);
                if !path.exists() {
                    return Err(usage(format!("--chain {:?} is neither a preset nor an existing file", args.chain)));
                }
                let loaded = load_chain_spec(path)?;
                let kernel = loaded.kernel;
                match (args.rule, loaded.rule) {
                    (RuleChoice::Default, Some(rule)) => (kernel, rule, "spec"),
                    (RuleChoice::Default, None) | (RuleChoice::Independent, _) => {
                        let rule = TransitionRule::independent(&kernel);
                        (kernel, rule, "independent")
                    }
                    (RuleChoice::InverseCdf, _) => {
                        let rule = TransitionRule::inverse_cdf(&kernel, &(0..kernel.size()).collect::<Vec<_>>())?;
                        (kernel, rule, "inverse-cdf")
                    }
                    (RuleChoice::Monotone, _) => {
                        return Err(usage("--rule monotone is only defined for the toy and walk presets"));
                    }
                }
            }
        };
        let rev = reverse_kernel(&kernel, ZeroMassPolicy::Strict)?;
        Ok(Model { label: args.chain.clone(), kernel: Some(kernel), rev: Some(rev), rule, rule_name, mtf: None })
    }

    fn tracker(&self, choice: TrackerChoice) -> CliResult<Tracker<'_>> {
        if let Some((detection, _)) = &self.mtf {
            return match choice {
                TrackerChoice::Auto => Ok(Tracker::Mtf(*detection)),
                _ => Err(usage("mtf chains use the requested-set detector; omit --tracker")),
            };
        }
        let order = self.kernel.as_ref().and_then(|k| k.space().order());
        Ok(match choice {
            TrackerChoice::Full => Tracker::Full(FullTracking::new(&self.rule)),
            TrackerChoice::Bounding => Tracker::Bounding(MonotoneBounding::new(&self.rule, order)?),
            TrackerChoice::Auto => match self.rule.is_monotone(order) {
                Ok(Monotonicity::Monotone) if order.is_some_and(|o| o.bottom().is_some() && o.top().is_some()) => {
                    Tracker::Bounding(MonotoneBounding::new(&self.rule, order)?)
                }
                _ => Tracker::Full(FullTracking::new(&self.rule)),
            },
        })
    }

    fn kernel(&self, command: &str) -> CliResult<(&DiscreteKernel, &ReversedKernel)> {
        match (&self.kernel, &self.rev) {
            (Some(k), Some(r)) => Ok((k, r)),
            _ => Err(usage(format!("`{command}` needs a chain with an explicit kernel; mtf presets only support cftp"))),
        }
    }

    fn stationary(&self) -> Option<ProbabilityVector> {
        match (&self.kernel, &self.mtf) {
            (Some(k), _) => Some(k.pi().clone()),
            (None, Some((_, w))) if self.rule.num_states() <= MAX_REPORTED_STATES => ProbabilityVector::new(mtf_stationary(w)).ok(),
            _ => None,
        }
    }

    fn header(&self, command: &str, tracker: &Tracker<'_>) -> serde_json::Map<String, Value> {
        let tracker_name = match tracker {
            Tracker::Full(_) => "full",
            Tracker::Bounding(_) => "bounding",
            Tracker::Mtf(_) => "requested-set",
        };
        let mut m = serde_json::Map::new();
        m.insert("command".into(), json!(command));
        m.insert("chain".into(), json!(self.label));
        m.insert("rule".into(), json!(self.rule_name));
        m.insert("tracker".into(), json!(tracker_name));
        m
    }
}

fn parse_seed_spec(z: &str, kernel: &DiscreteKernel) -> CliResult<SeedSpec> {
    if z == "pi" {
        return Ok(SeedSpec::Distribution(kernel.pi().clone()));
    }
    let state: usize = z.parse().map_err(|_| usage(format!("--z must be a state index or `pi`, got {z:?}")))?;
    Ok(SeedSpec::State(state))
}

fn thread_pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        builder = builder.num_threads(j);
    }
    builder.build().map_err(|e| Failure::Runtime(Error::InvalidInput(e.to_string())))
}

/// Counts and goodness of fit of `samples` against `expected`, when the
/// state space is small enough to tabulate.
fn sample_summary(samples: &[usize], n: usize, expected: Option<&ProbabilityVector>) -> (Value, Value) {
    if n > MAX_REPORTED_STATES {
        return (Value::Null, Value::Null);
    }
    let counts = state_counts(samples.iter().copied(), n);
    let gof = expected.and_then(|e| chi_square_gof(&counts, e).ok());
    (json!(counts), gof.map_or(Value::Null, |g| serde_json::to_value(g).expect("serializable")))
}

#[derive(Serialize, Deserialize)]
struct LoggedAttempt {
    rep: usize,
    #[serde(flatten)]
    record: RunRecord,
}

#[derive(Serialize, Deserialize)]
struct LoggedRun {
    rep: usize,
    #[serde(flatten)]
    run: BackwardRun,
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run_fill(args: &FillArgs) -> CliResult<Value> {
    let model = Model::load(&args.chain)?;
    let (kernel, rev) = model.kernel("fill")?;
    let tracker = model.tracker(args.chain.tracker)?;
    if args.t == 0 {
        return Err(usage("--t must be at least 1"));
    }
    let seed = parse_seed_spec(&args.z, kernel)?;
    let retry = match args.retry {
        RetryChoice::Fixed => RetryPolicy::FixedT { max_attempts: args.max_attempts },
        RetryChoice::Doubling => RetryPolicy::Doubling { max_attempts: args.max_attempts },
    };
    let sampler = FillSampler::new(kernel, rev, &model.rule, &tracker)?;
    let base = FillConfig::new(args.t, seed).with_retry(retry);
    let pool = thread_pool(args.run.jobs)?;
    let outcomes = pool.install(|| {
        (0..args.run.reps)
            .into_par_iter()
            .map(|r| sampler.sample(&base.clone().with_rng_seed(replication_seed(args.run.seed, r as u64))))
            .collect::<Vec<_>>()
    });
    let mut samples = Vec::with_capacity(outcomes.len());
    let mut attempts = Vec::with_capacity(outcomes.len());
    let mut steps = Vec::with_capacity(outcomes.len());
    let mut log = Vec::new();
    let mut failure = None;
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(o) => {
                samples.push(o.output);
                attempts.push(o.attempts.len());
                steps.push(o.attempts.last().map_or(0, |a| a.total_steps));
                log.extend(o.attempts.into_iter().map(|record| LoggedAttempt { rep, record }));
            }
            Err(Error::MaxAttemptsExceeded { attempts }) => {
                log.extend(attempts.iter().cloned().map(|record| LoggedAttempt { rep, record }));
                failure.get_or_insert(Error::MaxAttemptsExceeded { attempts });
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Some(path) = &args.run.log {
        let mut out = create(path)?;
        write_jsonl(&log, &mut out)?;
        out.flush()?;
    }
    if let Some(e) = failure {
        return Err(e.into());
    }
    if let Some(path) = &args.run.csv {
        let mut out = create(path)?;
        writeln!(out, "rep,output,attempts,total_steps")?;
        for (r, ((s, a), t)) in samples.iter().zip(&attempts).zip(&steps).enumerate() {
            writeln!(out, "{r},{s},{a},{t}")?;
        }
        out.flush()?;
    }
    let (counts, gof) = sample_summary(&samples, kernel.size(), Some(kernel.pi()));
    let mut m = model.header("fill", &tracker);
    m.insert("t".into(), json!(args.t));
    m.insert("z".into(), json!(args.z));
    m.insert("retry".into(), serde_json::to_value(retry).expect("serializable"));
    m.insert("reps".into(), json!(args.run.reps));
    m.insert("seed".into(), json!(args.run.seed));
    m.insert("samples".into(), json!(samples));
    m.insert("attempts".into(), json!(attempts));
    m.insert("total_steps".into(), json!(steps));
    m.insert("output_counts".into(), counts);
    m.insert("gof".into(), gof);
    Ok(Value::Object(m))
}

fn write_runs(runs: &[BackwardRun], run_args: &RunArgs) -> CliResult<()> {
    if let Some(path) = &run_args.log {
        let lines: Vec<LoggedRun> = runs.iter().cloned().enumerate().map(|(rep, run)| LoggedRun { rep, run }).collect();
        let mut out = create(path)?;
        write_jsonl(&lines, &mut out)?;
        out.flush()?;
    }
    if let Some(path) = &run_args.csv {
        let mut out = create(path)?;
        writeln!(out, "rep,T,output,markov_steps")?;
        for (r, run) in runs.iter().enumerate() {
            writeln!(out, "{r},{},{},{}", run.t, run.output, run.markov_steps)?;
        }
        out.flush()?;
    }
    Ok(())
}

fn runs_output(model: &Model, tracker: &Tracker<'_>, command: &str, runs: &[BackwardRun], run_args: &RunArgs) -> Value {
    let samples: Vec<usize> = runs.iter().map(|r| r.output).collect();
    let times: Vec<usize> = runs.iter().map(|r| r.t).collect();
    let expected = model.stationary();
    let (counts, gof) = sample_summary(&samples, model.rule.num_states(), expected.as_ref());
    let mut m = model.header(command, tracker);
    m.insert("reps".into(), json!(run_args.reps));
    m.insert("seed".into(), json!(run_args.seed));
    m.insert("samples".into(), json!(samples));
    m.insert("T".into(), json!(times));
    m.insert("output_counts".into(), counts);
    m.insert("gof".into(), gof);
    Value::Object(m)
}

fn run_cftp(args: &CftpArgs) -> CliResult<Value> {
    let model = Model::load(&args.chain)?;
    let tracker = model.tracker(args.chain.tracker)?;
    let pool = thread_pool(args.run.jobs)?;
    let runs = pool.install(|| {
        (0..args.run.reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(replication_seed(args.run.seed, r as u64), 0);
                cftp_sample(&model.rule, &tracker, args.window_cap, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    write_runs(&runs, &args.run)?;
    Ok(runs_output(&model, &tracker, "cftp", &runs, &args.run))
}

fn run_fill_inf(args: &FillInfArgs) -> CliResult<Value> {
    let model = Model::load(&args.chain)?;
    let (kernel, rev) = model.kernel("fill-inf")?;
    let tracker = model.tracker(args.chain.tracker)?;
    let seed = parse_seed_spec(&args.z, kernel)?;
    let policy: CheckPolicy = args.policy.parse().map_err(|e: Error| usage(e.to_string()))?;
    let pool = thread_pool(args.run.jobs)?;
    let runs = pool.install(|| {
        (0..args.run.reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream_rng(replication_seed(args.run.seed, r as u64), 0);
                fill_infinite_window(kernel, rev, &model.rule, &tracker, &seed, policy, args.window_cap, &mut rng)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    write_runs(&runs, &args.run)?;
    let mut out = runs_output(&model, &tracker, "fill-inf", &runs, &args.run);
    out["policy"] = json!(policy.name());
    out["z"] = json!(args.z);
    Ok(out)
}

fn run_enumerate(args: &EnumerateArgs) -> CliResult<Value> {
    let model = Model::load(&args.chain)?;
    let (kernel, rev) = model.kernel("enumerate")?;
    let tracker = model.tracker(args.chain.tracker)?;
    let report = exact_fill_report(kernel, rev, &model.rule, &tracker, args.t, args.z)?;
    Ok(serde_json::to_value(report).expect("serializable"))
}

fn run_check(args: &CheckArgs) -> CliResult<Value> {
    let model = Model::load(&args.chain)?;
    let (kernel, rev) = model.kernel("check")?;
    let tracker = model.tracker(args.chain.tracker)?;
    let report = connection_diagnostic(kernel, rev, &model.rule, &tracker, args.t_max)?;
    let bayes = bayes_consistency(kernel, rev, &model.rule)?;
    let all_hold = report.all_hold() && bayes.equal;
    let mut m = model.header("check", &tracker);
    m.insert("connection".into(), serde_json::to_value(report).expect("serializable"));
    m.insert("bayes_consistent".into(), json!(bayes.equal));
    m.insert("all_hold".into(), json!(all_hold));
    Ok(Value::Object(m))
}

fn run_curve(args: &CurveArgs) -> CliResult<Value> {
    let n = match args.chain.parse::<Preset>() {
        Ok(Preset::Walk(n)) => n,
        Ok(Preset::Toy) => 2,
        _ => return Err(usage("curve needs --chain walk:n")),
    };
    let pool = thread_pool(args.jobs)?;
    let points = pool.install(|| acceptance_curve(n, &args.c_grid, args.reps, args.seed))?;
    if let Some(path) = &args.csv {
        let mut out = create(path)?;
        writeln!(out, "c,t,replications,accepted,estimate,std_error")?;
        for p in &points {
            writeln!(out, "{},{},{},{},{},{}", p.c, p.t, p.replications, p.accepted, p.estimate, p.std_error)?;
        }
        out.flush()?;
    }
    Ok(json!({"command": "curve", "n": n, "reps": args.reps, "seed": args.seed, "points": points}))
}

fn run_test_interrupt(args: &TestInterruptArgs) -> CliResult<Value> {
    let lines: Vec<Value> = read_jsonl(BufReader::new(File::open(&args.log)?))?;
    let is_backward = lines.first().is_some_and(|l| l.get("T").is_some());
    let (source, report) = if is_backward {
        let runs =
            lines.into_iter().map(serde_json::from_value::<LoggedRun>).collect::<std::result::Result<Vec<_>, _>>().map_err(Error::from)?;
        let pairs: Vec<(usize, u64)> = runs.iter().map(|r| (r.run.output, r.run.t as u64)).collect();
        ("backward", independence_test(&pairs, args.buckets)?)
    } else {
        let records = lines
            .into_iter()
            .map(serde_json::from_value::<LoggedAttempt>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(Error::from)?;
        let accepted: Vec<RunRecord> = records.into_iter().map(|l| l.record).filter(|r| r.accepted).collect();
        ("fill", interruptibility_test(&accepted, args.buckets)?)
    };
    if let Some(path) = &args.csv {
        let mut out = create(path)?;
        report.write_csv(&mut out)?;
        out.flush()?;
    }
    let mut v = serde_json::to_value(report).expect("serializable");
    v["command"] = json!("test-interrupt");
    v["source"] = json!(source);
    Ok(v)
}

/// Rounds every float in `v` to 12 significant digits.
fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
            if let Some(r) = serde_json::Number::from_f64(rounded) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn error_json(e: &Error) -> Value {
    json!({"error": e.kind(), "message": e.to_string()})
}

/// Runs the command line on `args` (including the program name), writing to
/// the given streams. Returns the process exit code.
pub fn run_cli_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    let result = match &cli.command {
        Command::Fill(a) => run_fill(a),
        Command::Cftp(a) => run_cftp(a),
        Command::FillInf(a) => run_fill_inf(a),
        Command::Enumerate(a) => run_enumerate(a),
        Command::Check(a) => run_check(a),
        Command::Curve(a) => run_curve(a),
        Command::TestInterrupt(a) => run_test_interrupt(a),
    };
    match result {
        Ok(mut v) => {
            round_floats(&mut v);
            let _ = writeln!(stdout, "{v}");
            0
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}\n\n{}", Cli::command().render_usage());
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stdout, "{}", error_json(&e));
            1
        }
    }
}

/// Runs the command line against the process's stdout and stderr.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = run_cli_with(args, &mut stdout.lock(), &mut stderr.lock());
    let _ = std::io::stdout().flush();
    code
}

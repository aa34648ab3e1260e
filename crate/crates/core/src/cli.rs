//! Command-line front end.
//!
//! Every subcommand resolves its parameters as flag, then config file, then
//! built-in default, and echoes the effective values in the JSON summary.
//! Exit codes: 0 success, 1 a reproduction target missed, 2 bad input or
//! configuration, 3 an undefined statistic under `--strict`.

use std::ffi::OsString;
use std::f64::consts::{FRAC_PI_8, PI};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bellgame::{counterfactual_table, play_game, SettingSource, Strategy};
use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::estimators::{
    bell_counter_test, chsh_by_labels, eberhard_counts, eberhard_j, vongher_counters, ChshEstimate, ChshLabels, EberhardMapping,
};
use crate::io::{csv_string, parse_csv, read_events, write_atomic};
use crate::pairing::{coincidence_fraction, covariance, pair_systematic, PairingScheme};
use crate::randi::{gill_campaign, vongher_campaign, CampaignReport, GillGenerator, VongherSource};
use crate::rng::SeededRng;
use crate::sources::{
    contextual_trial, generate_cfd_spreadsheet, generate_tennis_balls, sample_singlet_pair, sample_smeared_pair,
    singlet_correlation, AngleJitter, ContextualParams, JitterDensity,
};
use crate::stats::{
    bin_statistic, breakdown_demo, chebyshev_confidence, homogeneity_test, BinReducer, BinnedSample, DriftingDeviceSpec,
    HomogeneityInput, HomogeneityMethod,
};
use crate::summary::Summary;
use crate::types::{Angle, Outcome, PairedTrial, Setting, StationEvent, TimedTrial};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TARGET_MISSED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_UNDEFINED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "bell-lab", version, about = "Monte Carlo laboratory for Bell-type correlation experiments")]
pub struct Cli {
    /// Master seed; generated and recorded in the summary when absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat key = value config file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Exit 3 when a reported statistic is undefined.
    #[arg(long, global = true)]
    strict: bool,
    /// CSV output (events, trials or per-run table, depending on command).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON summary output.
    #[arg(long, global = true)]
    summary: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate trials from a source model.
    Simulate(SimulateArgs),
    /// Build trials from two station event streams.
    Pair(PairArgs),
    /// Estimate CHSH, Eberhard J and counter inequalities from a trial file.
    Estimate(EstimateArgs),
    /// Coin-toss subsampling challenge on instruction-set spreadsheets.
    QrcGill(GillArgs),
    /// Tennis-ball challenge with the counter and CHSH inequalities.
    QrcVongher(VongherArgs),
    /// Play the Bell game.
    Bellgame(GameArgs),
    /// Binned statistics and homogeneity tests on an event or trial file.
    Homogeneity(HomogeneityArgs),
    /// Inhomogeneous-device breakdown demonstration.
    Breakdown(BreakdownArgs),
    /// Rerun a headline result and compare it to its target.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// singlet | smeared | spreadsheet | tennis | contextual
    #[arg(long)]
    model: Option<String>,
    /// Analyzer angles `θa,θb` in radians (singlet, smeared).
    #[arg(long, allow_hyphen_values = true)]
    angles: Option<String>,
    #[arg(long)]
    n: Option<u64>,
    /// Jitter half-width in radians (smeared).
    #[arg(long)]
    jitter: Option<f64>,
    /// Truncated-Gaussian jitter scale; uniform jitter when absent.
    #[arg(long)]
    sigma: Option<f64>,
    /// uniform | constant | boundary (spreadsheet)
    #[arg(long)]
    generator: Option<String>,
    /// strict | missing_pairs[:p] | partial_anticorr[:q] (tennis)
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    tau0: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Also write station A's event stream here.
    #[arg(long)]
    events_a: Option<PathBuf>,
    #[arg(long)]
    events_b: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PairArgs {
    #[arg(long)]
    events_a: Option<PathBuf>,
    #[arg(long)]
    events_b: Option<PathBuf>,
    /// systematic:k | random:m | window:w
    #[arg(long)]
    pairing: Option<String>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Trial CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// CHSH labels `a,a′,b,b′`.
    #[arg(long)]
    labels: Option<String>,
    /// Setting labels for Eberhard subscripts `a1,a2,b1,b2`.
    #[arg(long)]
    eberhard_map: Option<String>,
}

#[derive(Debug, Args)]
struct GillArgs {
    /// Spreadsheet rows per run.
    #[arg(long)]
    rows: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    generator: Option<String>,
}

#[derive(Debug, Args)]
struct VongherArgs {
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    pairs: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
}

#[derive(Debug, Args)]
struct GameArgs {
    /// fixed:i,j | random | scripted | contextual | quantum
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    rounds: Option<u64>,
    /// uniform | script
    #[arg(long)]
    settings: Option<String>,
}

#[derive(Debug, Args)]
struct HomogeneityArgs {
    /// Station event CSV, or timed trial CSV (`window_index,setting_a,...`).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    bins: Option<u64>,
    /// all | chi_square_splits | two_sample_ks | runs_test
    #[arg(long)]
    method: Option<String>,
    /// Parts for the chi-square split test.
    #[arg(long)]
    parts: Option<u64>,
    /// Significance level used for the per-test verdicts.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eberhard_map: Option<String>,
}

#[derive(Debug, Args)]
struct BreakdownArgs {
    /// JSON device spec; the built-in two-regime device when absent.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    run_len: Option<u64>,
}

#[derive(Debug, Args)]
struct ReproduceArgs {
    /// singlet | smeared | pairing | bounds | gill | vongher-strict |
    /// vongher-quantum | vongher-partial | bellgame | no-signaling |
    /// contextual | stats | all
    #[arg(long)]
    target: Option<String>,
}

const CONFIG_KEYS: &[&str] = &[
    "seed", "strict", "out", "summary", "model", "angles", "n", "jitter", "sigma", "generator", "variant", "tau0", "gamma",
    "events_a", "events_b", "pairing", "input", "labels", "eberhard_map", "rows", "runs", "pairs", "strategy", "rounds",
    "settings", "bins", "method", "parts", "alpha", "spec", "run_len", "target",
];

/// Parameter resolution plus the record of what was used.
struct Ctx {
    cfg: Config,
    cli_seed: Option<u64>,
    seed: Option<u64>,
    echo: Map<String, Value>,
}

impl Ctx {
    fn seed(&mut self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        let s = match self.cli_seed {
            Some(s) => s,
            None => match self.cfg.u64("seed")? {
                Some(s) => s,
                None => {
                    let s = rand::random::<u64>();
                    eprintln!("seed: {s}");
                    s
                }
            },
        };
        self.seed = Some(s);
        self.echo.insert("seed".into(), json!(s));
        Ok(s)
    }

    fn u64(&mut self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        let v = match flag {
            Some(v) => v,
            None => self.cfg.u64(key)?.unwrap_or(default),
        };
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn f64(&mut self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        let v = match flag {
            Some(v) => v,
            None => self.cfg.f64(key)?.unwrap_or(default),
        };
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn opt_f64(&mut self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.cfg.f64(key)?,
        };
        if let Some(v) = v {
            self.echo.insert(key.into(), json!(v));
        }
        Ok(v)
    }

    fn string(&mut self, key: &str, flag: Option<String>, default: &str) -> Result<String> {
        let v = match flag {
            Some(v) => v,
            None => self.cfg.string(key)?.unwrap_or_else(|| default.to_string()),
        };
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.cfg.string(key)?.map(PathBuf::from),
        };
        if let Some(p) = &v {
            self.echo.insert(key.into(), json!(p.display().to_string()));
        }
        Ok(v)
    }

    fn required_path(&mut self, key: &str, flag: Option<PathBuf>) -> Result<PathBuf> {
        self.path(key, flag)?.ok_or_else(|| Error::Config(format!("--{} is required", key.replace('_', "-"))))
    }
}

/// What a command produced, before anything is written.
#[derive(Default)]
struct Output {
    csv: Option<String>,
    results: Value,
    /// Extra files (path, contents) written alongside `--out`.
    extra_files: Vec<(PathBuf, String)>,
    undefined: bool,
    missed: bool,
    text: String,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::ContractViolation(_) => EXIT_TARGET_MISSED,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    cfg.check_keys(CONFIG_KEYS)?;
    let strict = cli.strict || cfg.bool("strict")?.unwrap_or(false);
    let mut ctx = Ctx {
        cfg,
        cli_seed: cli.seed,
        seed: None,
        echo: Map::new(),
    };
    let out_path = ctx.path("out", cli.out)?;
    let summary_path = ctx.path("summary", cli.summary)?;
    let (name, output) = match cli.command {
        Command::Simulate(a) => ("simulate", simulate(&mut ctx, a)?),
        Command::Pair(a) => ("pair", pair(&mut ctx, a)?),
        Command::Estimate(a) => ("estimate", estimate(&mut ctx, a)?),
        Command::QrcGill(a) => ("qrc-gill", qrc_gill(&mut ctx, a)?),
        Command::QrcVongher(a) => ("qrc-vongher", qrc_vongher(&mut ctx, a)?),
        Command::Bellgame(a) => ("bellgame", bellgame(&mut ctx, a)?),
        Command::Homogeneity(a) => ("homogeneity", homogeneity(&mut ctx, a)?),
        Command::Breakdown(a) => ("breakdown", breakdown(&mut ctx, a)?),
        Command::Reproduce(a) => ("reproduce", reproduce(&mut ctx, a)?),
    };
    if let (Some(path), Some(csv)) = (&out_path, &output.csv) {
        write_atomic(path, csv.as_bytes())?;
    }
    for (path, body) in &output.extra_files {
        write_atomic(path, body.as_bytes())?;
    }
    ctx.echo.insert("strict".into(), json!(strict));
    let summary = Summary::new(name, ctx.seed, Value::Object(ctx.echo), output.results);
    match &summary_path {
        Some(p) => summary.write(p)?,
        None if output.text.is_empty() => print!("{}", summary.to_json()?),
        None => {}
    }
    print!("{}", output.text);
    if output.missed {
        return Ok(EXIT_TARGET_MISSED);
    }
    if strict && output.undefined {
        eprintln!("error: undefined statistic (strict mode)");
        return Ok(EXIT_UNDEFINED);
    }
    Ok(EXIT_OK)
}

fn parse_list<T: std::str::FromStr>(s: &str, n: usize, what: &str) -> Result<Vec<T>> {
    let v: Vec<T> = s
        .split(',')
        .map(|x| x.trim().parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("{what}: cannot parse '{s}'")))?;
    if v.len() != n {
        return Err(Error::Config(format!("{what}: expected {n} comma-separated values, got '{s}'")));
    }
    Ok(v)
}

fn parse_labels(s: &str) -> Result<ChshLabels> {
    let v: Vec<u8> = parse_list(s, 4, "labels")?;
    Ok(ChshLabels {
        a: Setting(v[0]),
        a_prime: Setting(v[1]),
        b: Setting(v[2]),
        b_prime: Setting(v[3]),
    })
}

fn parse_mapping(s: &str) -> Result<EberhardMapping> {
    let v: Vec<u8> = parse_list(s, 4, "eberhard_map")?;
    Ok(EberhardMapping {
        a1: Setting(v[0]),
        a2: Setting(v[1]),
        b1: Setting(v[2]),
        b2: Setting(v[3]),
    })
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn chsh_json(e: &ChshEstimate) -> Value {
    let t = e.terms();
    json!({
        "terms": {
            "ab": t[0].value, "ab_prime": t[1].value, "a_prime_b": t[2].value, "a_prime_b_prime": t[3].value,
        },
        "sample_sizes": e.sample_sizes(),
        "s_value": e.s_value,
        "s_max": e.s_max(),
        "violated": e.violates(),
    })
}

fn events_from(outcomes: &[Outcome], setting: Setting) -> Vec<StationEvent> {
    outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| StationEvent::new(i as u64, setting, *o))
        .collect()
}

fn simulate(ctx: &mut Ctx, a: SimulateArgs) -> Result<Output> {
    let model = ctx.string("model", a.model, "singlet")?;
    let n = ctx.u64("n", a.n, 1000)? as usize;
    let seed = ctx.seed()?;
    let mut rng = SeededRng::new(seed, 0);
    let mut out = Output::default();
    let station_trials = |out: &mut Output, trials: &[PairedTrial], ea: Option<PathBuf>, eb: Option<PathBuf>| -> Result<()> {
        out.csv = Some(csv_string(trials)?);
        if let Some(p) = ea {
            let ev: Vec<_> = trials.iter().enumerate().map(|(i, t)| StationEvent::new(i as u64, t.setting_a, t.a)).collect();
            out.extra_files.push((p, csv_string(&ev)?));
        }
        if let Some(p) = eb {
            let ev: Vec<_> = trials.iter().enumerate().map(|(i, t)| StationEvent::new(i as u64, t.setting_b, t.b)).collect();
            out.extra_files.push((p, csv_string(&ev)?));
        }
        Ok(())
    };
    let events_a = ctx.path("events_a", a.events_a)?;
    let events_b = ctx.path("events_b", a.events_b)?;
    match model.as_str() {
        "singlet" | "smeared" => {
            let angles = ctx.string("angles", a.angles, "0,0")?;
            let th: Vec<f64> = parse_list(&angles, 2, "angles")?;
            let (ta, tb) = (Angle::new(th[0]), Angle::new(th[1]));
            let trials: Vec<PairedTrial> = if model == "singlet" {
                (0..n)
                    .map(|_| {
                        let (x, y) = sample_singlet_pair(ta, tb, &mut rng);
                        PairedTrial::new(Setting(0), Setting(0), x, y)
                    })
                    .collect()
            } else {
                let w = ctx.f64("jitter", a.jitter, FRAC_PI_8)?;
                let density = match ctx.opt_f64("sigma", a.sigma)? {
                    Some(sigma) => JitterDensity::TruncatedGaussian { sigma },
                    None => JitterDensity::Uniform,
                };
                let ja = AngleJitter::new(ta, w, density)?;
                let jb = AngleJitter::new(tb, w, density)?;
                (0..n)
                    .map(|_| {
                        let (x, y) = sample_smeared_pair(&ja, &jb, &mut rng);
                        PairedTrial::new(Setting(0), Setting(0), x, y)
                    })
                    .collect()
            };
            let e = crate::estimators::correlation(&trials);
            out.undefined = e.is_none();
            out.results = json!({
                "model": model,
                "correlation": e,
                "n": trials.len(),
                "singlet_prediction": singlet_correlation(ta, tb),
            });
            station_trials(&mut out, &trials, events_a, events_b)?;
        }
        "contextual" => {
            let tau0 = ctx.f64("tau0", a.tau0, crate::sources::THRESHOLD_TAU0)?;
            let gamma = ctx.f64("gamma", a.gamma, crate::sources::THRESHOLD_GAMMA)?;
            let params = ContextualParams::threshold_detection_with(tau0, gamma);
            params.validate()?;
            let mut trials = Vec::with_capacity(n);
            for _ in 0..n {
                let x = Setting(rng.coin() as u8);
                let y = Setting(rng.coin() as u8);
                trials.push(contextual_trial(x, y, &params, &mut rng)?);
            }
            let est = chsh_by_labels(&trials, ChshLabels::default());
            out.undefined = est.s_value.is_none();
            out.results = json!({
                "model": model,
                "n": trials.len(),
                "coincidence_fraction": coincidence_fraction(&trials),
                "chsh": chsh_json(&est),
            });
            station_trials(&mut out, &trials, events_a, events_b)?;
        }
        "spreadsheet" => {
            let g: GillGenerator = ctx.string("generator", a.generator, "uniform")?.parse()?;
            let sheet = generate_cfd_spreadsheet(n, &g.distribution(), &mut rng)?;
            let full = crate::estimators::chsh_full_table(&sheet);
            out.results = json!({ "model": model, "rows": sheet.len(), "full_table_chsh": chsh_json(&full) });
            out.csv = Some(csv_string(&sheet.rows)?);
        }
        "tennis" => {
            let source: VongherSource = ctx.string("variant", a.variant, "strict")?.parse()?;
            let VongherSource::Balls(model_spec) = source else {
                return Err(Error::Config("tennis variant must be strict, missing_pairs or partial_anticorr".into()));
            };
            let balls = generate_tennis_balls(n, &model_spec, &mut rng)?;
            let c = crate::estimators::counterfactual_counters(&balls);
            let verdict = bell_counter_test(&c);
            out.results = json!({ "model": model, "pairs": balls.len(), "counterfactual_counters": c, "bell": verdict });
            out.csv = Some(csv_string(&balls)?);
        }
        other => return Err(Error::Config(format!("unknown model '{other}'"))),
    }
    Ok(out)
}

fn pair(ctx: &mut Ctx, a: PairArgs) -> Result<Output> {
    let pa = ctx.required_path("events_a", a.events_a)?;
    let pb = ctx.required_path("events_b", a.events_b)?;
    let scheme: PairingScheme = ctx.string("pairing", a.pairing, "systematic:1")?.parse()?;
    let ea = read_events(&pa)?;
    let eb = read_events(&pb)?;
    let mut rng = match scheme {
        PairingScheme::Random { .. } => SeededRng::new(ctx.seed()?, 0),
        _ => SeededRng::new(0, 0),
    };
    let trials = scheme.apply(&ea, &eb, &mut rng)?;
    let cov = covariance(&trials, true).ok();
    let coincidences = trials.iter().filter(|t| t.is_coincidence()).count();
    Ok(Output {
        csv: Some(csv_string(&trials)?),
        undefined: cov.is_none(),
        results: json!({
            "pairing": scheme.to_string(),
            "trials": trials.len(),
            "coincidences": coincidences,
            "coincidence_fraction": coincidence_fraction(&trials),
            "covariance": cov,
        }),
        ..Output::default()
    })
}

fn estimate(ctx: &mut Ctx, a: EstimateArgs) -> Result<Output> {
    let input = ctx.required_path("input", a.input)?;
    let labels = parse_labels(&ctx.string("labels", a.labels, "0,1,0,1")?)?;
    let map = parse_mapping(&ctx.string("eberhard_map", a.eberhard_map, "0,1,0,1")?)?;
    let trials = read_trials_any(&input)?;
    let est = chsh_by_labels(&trials, labels);
    let counts = eberhard_counts(&trials, map);
    let j = eberhard_j(&counts);
    let counters = vongher_counters(&trials);
    Ok(Output {
        undefined: est.s_value.is_none(),
        results: json!({
            "n_trials": trials.len(),
            "chsh": chsh_json(&est),
            "eberhard": { "counts": counts, "j": j, "violated": j < 0 },
            "counters": { "n_e": counters.n_e, "n_u": counters.n_u, "verdict": bell_counter_test(&counters) },
        }),
        ..Output::default()
    })
}

/// Plain or timed trial CSV.
fn read_trials_any(path: &Path) -> Result<Vec<PairedTrial>> {
    let text = read_text(path)?;
    if header_has(&text, "window_index") {
        Ok(parse_csv::<TimedTrial>(&text)?.into_iter().map(|t| t.trial).collect())
    } else {
        parse_csv(&text)
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.display().to_string(),
        source,
    })
}

fn header_has(text: &str, column: &str) -> bool {
    text.lines().next().is_some_and(|h| h.split(',').any(|c| c.trim() == column))
}

fn campaign_output(report: &CampaignReport) -> Result<Output> {
    let mut results = to_value(report)?;
    if let Value::Object(m) = &mut results {
        m.remove("per_run");
    }
    Ok(Output {
        csv: Some(csv_string(&report.per_run)?),
        undefined: report.per_run.iter().any(|r| r.s_value.is_none()),
        results,
        ..Output::default()
    })
}

fn qrc_gill(ctx: &mut Ctx, a: GillArgs) -> Result<Output> {
    let rows = ctx.u64("rows", a.rows, 3200)? as usize;
    let runs = ctx.u64("runs", a.runs, 1000)? as usize;
    let g: GillGenerator = ctx.string("generator", a.generator, "uniform")?.parse()?;
    let seed = ctx.seed()?;
    campaign_output(&gill_campaign(&g.distribution(), rows, runs, seed)?)
}

fn qrc_vongher(ctx: &mut Ctx, a: VongherArgs) -> Result<Output> {
    let source: VongherSource = ctx.string("variant", a.variant, "strict")?.parse()?;
    let pairs = ctx.u64("pairs", a.pairs, 800)? as usize;
    let runs = ctx.u64("runs", a.runs, 1000)? as usize;
    let seed = ctx.seed()?;
    campaign_output(&vongher_campaign(&source, pairs, runs, seed)?)
}

fn bellgame(ctx: &mut Ctx, a: GameArgs) -> Result<Output> {
    let strategy: Strategy = ctx.string("strategy", a.strategy, "random")?.parse()?;
    let default_settings = if matches!(strategy, Strategy::Scripted { .. }) { "script" } else { "uniform" };
    let source = match ctx.string("settings", a.settings, default_settings)?.as_str() {
        "uniform" => SettingSource::Uniform,
        "script" => SettingSource::Script,
        other => return Err(Error::Config(format!("unknown settings source '{other}'"))),
    };
    let default_rounds = if source == SettingSource::Script { 4 } else { 1000 };
    let rounds = ctx.u64("rounds", a.rounds, default_rounds)?;
    let mut rng = SeededRng::new(ctx.seed()?, 0);
    let report = play_game(&strategy, rounds, &mut rng, source)?;
    Ok(Output {
        csv: Some(csv_string(&report.log)?),
        results: to_value(&report)?,
        ..Output::default()
    })
}

fn homogeneity(ctx: &mut Ctx, a: HomogeneityArgs) -> Result<Output> {
    let input = ctx.required_path("input", a.input)?;
    let bins = ctx.u64("bins", a.bins, 30)? as usize;
    let parts = ctx.u64("parts", a.parts, 2)? as usize;
    let alpha = ctx.f64("alpha", a.alpha, 0.01)?;
    let method = ctx.string("method", a.method, "all")?;
    let methods: Vec<HomogeneityMethod> = match method.as_str() {
        "all" => vec![
            HomogeneityMethod::ChiSquareSplits { parts },
            HomogeneityMethod::TwoSampleKs,
            HomogeneityMethod::RunsTest,
        ],
        m => match m.parse()? {
            HomogeneityMethod::ChiSquareSplits { .. } if !m.contains(':') => vec![HomogeneityMethod::ChiSquareSplits { parts }],
            other => vec![other],
        },
    };
    let text = read_text(&input)?;
    let mut undefined = false;
    let run_battery = |values: &[f64], symbols: &[u32]| -> Value {
        let mut out = Map::new();
        for m in &methods {
            let input = match m {
                HomogeneityMethod::ChiSquareSplits { .. } => HomogeneityInput::Symbols(symbols.to_vec()),
                _ => HomogeneityInput::Values(values.to_vec()),
            };
            let v = match homogeneity_test(&input, *m) {
                Ok(r) => json!({ "statistic": r.statistic, "p_value": r.p_value, "df": r.df, "homogeneous": r.p_value >= alpha }),
                Err(e) => json!({ "error": e.to_string() }),
            };
            out.insert(m.name().into(), v);
        }
        Value::Object(out)
    };
    let sample_json = |s: &crate::stats::BinnedStatistic| -> (Value, Option<BinnedSample>) {
        let sample = s.sample().ok();
        let sem = sample.as_ref().map(crate::stats::sem);
        (
            json!({
                "per_bin": s.per_bin,
                "undefined_bins": s.undefined_bins(),
                "windows_per_bin": s.windows_per_bin,
                "dropped_events": s.dropped_events,
                "dropped_windows": s.dropped_windows,
                "mean": sem.map(|m| m.mean),
                "sem": sem.map(|m| m.sem),
                "n_bins": sem.map(|m| m.n),
            }),
            sample,
        )
    };
    let results = if header_has(&text, "setting_a") {
        let map = parse_mapping(&ctx.string("eberhard_map", a.eberhard_map, "0,1,0,1")?)?;
        let trials: Vec<TimedTrial> = parse_csv(&text)?;
        let total = trials.iter().map(|t| t.window_index + 1).max().unwrap_or(0);
        let binned = bin_statistic(&trials, total, bins, |s| BinReducer::EberhardJ(map).reduce(s))?;
        undefined |= !binned.undefined_bins().is_empty();
        let (mut j, sample) = sample_json(&binned);
        if let Some(sample) = &sample {
            let m = crate::stats::sem(sample);
            let conf = chebyshev_confidence(m.mean, m.sem, 0.0)?;
            j["chebyshev"] = to_value(&conf)?;
        } else {
            undefined = true;
        }
        let values: Vec<f64> = sample.map(|s| s.values().to_vec()).unwrap_or_default();
        // per setting pair: joint outcome symbols in time order
        let mut per_setting = Map::new();
        let mut keys: Vec<(u8, u8)> = trials.iter().map(|t| (t.trial.setting_a.0, t.trial.setting_b.0)).collect();
        keys.sort_unstable();
        keys.dedup();
        for (sa, sb) in keys {
            let symbols: Vec<u32> = trials
                .iter()
                .filter(|t| (t.trial.setting_a.0, t.trial.setting_b.0) == (sa, sb))
                .map(|t| ((t.trial.a.value() + 1) * 3 + (t.trial.b.value() + 1)) as u32)
                .collect();
            let r = homogeneity_test(&HomogeneityInput::Symbols(symbols.clone()), HomogeneityMethod::ChiSquareSplits { parts });
            per_setting.insert(
                format!("{sa},{sb}"),
                match r {
                    Ok(r) => json!({ "n": symbols.len(), "chi_square_splits": { "statistic": r.statistic, "p_value": r.p_value, "homogeneous": r.p_value >= alpha } }),
                    Err(e) => json!({ "n": symbols.len(), "error": e.to_string() }),
                },
            );
        }
        let j_symbols: Vec<u32> = Vec::new();
        let battery = if values.len() >= 2 {
            let mut b = run_battery(&values, &j_symbols);
            // the split test on J values uses pooled quantile categories
            if let Some(m) = methods.iter().find(|m| matches!(m, HomogeneityMethod::ChiSquareSplits { .. })) {
                b[m.name()] = match homogeneity_test(&HomogeneityInput::Values(values.clone()), *m) {
                    Ok(r) => json!({ "statistic": r.statistic, "p_value": r.p_value, "df": r.df, "homogeneous": r.p_value >= alpha }),
                    Err(e) => json!({ "error": e.to_string() }),
                };
            }
            b
        } else {
            Value::Null
        };
        json!({ "input_kind": "timed_trials", "j": j, "j_homogeneity": battery, "per_setting": per_setting })
    } else {
        let events: Vec<StationEvent> = parse_csv(&text)?;
        crate::io::check_window_order(&events)?;
        let total = events.last().map_or(0, |e| e.window_index + 1);
        let mut settings: Vec<u8> = events.iter().map(|e| e.setting.0).collect();
        settings.sort_unstable();
        settings.dedup();
        let mut per_setting = Map::new();
        for s in settings {
            let stream: Vec<StationEvent> = events.iter().filter(|e| e.setting.0 == s).copied().collect();
            let binned = bin_statistic(&stream, total, bins, |ev| {
                Some(ev.iter().map(|e| e.outcome.value() as f64).sum::<f64>() / ev.len() as f64)
            })?;
            undefined |= !binned.undefined_bins().is_empty();
            let (mut entry, sample) = sample_json(&binned);
            let values: Vec<f64> = sample.map(|s| s.values().to_vec()).unwrap_or_default();
            let symbols: Vec<u32> = stream.iter().map(|e| (e.outcome.value() + 1) as u32).collect();
            entry["homogeneity"] = run_battery(&values, &symbols);
            per_setting.insert(s.to_string(), entry);
        }
        json!({ "input_kind": "events", "mean_outcome_per_bin": per_setting })
    };
    Ok(Output {
        undefined,
        results,
        ..Output::default()
    })
}

fn breakdown(ctx: &mut Ctx, a: BreakdownArgs) -> Result<Output> {
    let spec = match ctx.path("spec", a.spec)? {
        Some(p) => serde_json::from_str::<DriftingDeviceSpec>(&read_text(&p)?)?,
        None => DriftingDeviceSpec::default(),
    };
    let runs = ctx.u64("runs", a.runs, 100)? as usize;
    let run_len = ctx.u64("run_len", a.run_len, 100_000)? as usize;
    let seed = ctx.seed()?;
    ctx.echo.insert("device".into(), to_value(&spec)?);
    let report = breakdown_demo(&spec, runs, run_len, seed)?;
    let mut results = to_value(&report)?;
    if let Value::Object(m) = &mut results {
        m.remove("per_run");
    }
    Ok(Output {
        csv: Some(csv_string(&report.per_run)?),
        results,
        ..Output::default()
    })
}

/// One reproduced figure.
#[derive(Debug, Serialize)]
struct TargetLine {
    target: String,
    measured: String,
    expected: String,
    pass: bool,
}

const TARGETS: &[&str] = &[
    "singlet",
    "smeared",
    "pairing",
    "bounds",
    "gill",
    "vongher-strict",
    "vongher-quantum",
    "vongher-partial",
    "bellgame",
    "no-signaling",
    "contextual",
    "stats",
];

fn reproduce(ctx: &mut Ctx, a: ReproduceArgs) -> Result<Output> {
    let target = ctx.string("target", a.target, "all")?;
    let seed = ctx.seed()?;
    let chosen: Vec<&str> = if target == "all" {
        TARGETS.to_vec()
    } else if TARGETS.contains(&target.as_str()) {
        vec![target.as_str()]
    } else {
        return Err(Error::Config(format!("unknown target '{target}'; one of all, {}", TARGETS.join(", "))));
    };
    let mut lines = Vec::new();
    for t in chosen {
        lines.extend(reproduce_target(t, seed)?);
    }
    let mut text = String::new();
    for l in &lines {
        text.push_str(&format!(
            "{:<4} {:<28} measured {:<32} target {}\n",
            if l.pass { "PASS" } else { "FAIL" },
            l.target,
            l.measured,
            l.expected
        ));
    }
    Ok(Output {
        missed: lines.iter().any(|l| !l.pass),
        results: json!({ "targets": lines }),
        text,
        ..Output::default()
    })
}

fn line(target: &str, measured: String, expected: String, pass: bool) -> TargetLine {
    TargetLine {
        target: target.into(),
        measured,
        expected,
        pass,
    }
}

fn reproduce_target(t: &str, seed: u64) -> Result<Vec<TargetLine>> {
    let n = 100_000usize;
    let tol = 4.0 / (n as f64).sqrt();
    Ok(match t {
        "singlet" => {
            let mut worst = 0.0f64;
            for k in 0..8u64 {
                let delta = k as f64 * PI / 8.0;
                let mut rng = SeededRng::new(seed, k);
                let (ta, tb) = (Angle::new(0.0), Angle::new(delta));
                let s: i64 = (0..n)
                    .map(|_| {
                        let (x, y) = sample_singlet_pair(ta, tb, &mut rng);
                        (x.value() * y.value()) as i64
                    })
                    .sum();
                worst = worst.max((s as f64 / n as f64 + delta.cos()).abs());
            }
            vec![line("singlet E = -cos(delta)", format!("max dev {worst:.5}"), format!("<= {tol:.5}"), worst <= tol)]
        }
        "smeared" => {
            let w = FRAC_PI_8;
            let j = AngleJitter::uniform(Angle::new(0.0), w)?;
            let mut rng = SeededRng::new(seed, 0);
            let s: i64 = (0..n)
                .map(|_| {
                    let (x, y) = sample_smeared_pair(&j, &j, &mut rng);
                    (x.value() * y.value()) as i64
                })
                .sum();
            let e = s as f64 / n as f64;
            let expect = -(w.sin() / w).powi(2);
            vec![line("smeared E", format!("{e:.5}"), format!("{expect:.5} +- {tol:.5}"), (e - expect).abs() <= tol)]
        }
        "pairing" => {
            let alt = |len: usize, first: i8| -> Vec<StationEvent> {
                let o: Vec<Outcome> = (0..len)
                    .map(|i| Outcome::try_from(if i % 2 == 0 { first } else { -first }).expect("±1"))
                    .collect();
                events_from(&o, Setting(0))
            };
            let mut out = Vec::new();
            for k in [1usize, 2] {
                let c = covariance(&pair_systematic(&alt(1000, -1), &alt(1000 + k - 1, 1), k)?, true)?;
                let want = if k % 2 == 1 { -1.0 } else { 1.0 };
                out.push(line(&format!("systematic pairing k={k}"), format!("{c}"), format!("{want} exactly"), c == want));
            }
            let m = 100_000;
            let trials = PairingScheme::Random { m }.apply(&alt(1000, -1), &alt(1000, 1), &mut SeededRng::new(seed, 0))?;
            let c = covariance(&trials, true)?;
            let bound = 4.0 / (m as f64).sqrt();
            out.push(line("random pairing", format!("{c:.5}"), format!("|cov| <= {bound:.5}"), c.abs() <= bound));
            out
        }
        "bounds" => {
            let mut rng = SeededRng::new(seed, 0);
            let mut worst = f64::NEG_INFINITY;
            for _ in 0..10_000 {
                let sheet = generate_cfd_spreadsheet(1 + rng.index(64), &GillGenerator::Uniform.distribution(), &mut rng)?;
                if let Some(s) = crate::estimators::chsh_full_table(&sheet).s_value {
                    worst = worst.max(s.abs());
                }
            }
            vec![line("full-table CHSH", format!("max |S| {worst:.4}"), "<= 2".into(), worst <= 2.0 + 1e-12)]
        }
        "gill" => {
            let r = gill_campaign(&GillGenerator::Uniform.distribution(), 3200, 1000, seed)?;
            vec![line(
                "gill uniform violation rate",
                format!("{:.4}", r.chsh_violation_rate),
                format!("<= {:.4}", r.win_threshold),
                r.chsh_violation_rate <= r.win_threshold,
            )]
        }
        "vongher-strict" => {
            let r = vongher_campaign(&"strict".parse()?, 800, 1000, seed)?;
            let b = r.bell_violations.unwrap_or(0);
            vec![line(
                "vongher strict violations",
                format!("bell {b} chsh {}", r.chsh_violations),
                "0 and 0".into(),
                b == 0 && r.chsh_violations == 0,
            )]
        }
        "vongher-quantum" => {
            let r = vongher_campaign(&VongherSource::Quantum, 800, 1000, seed)?;
            let bell = 100.0 * r.bell_violation_rate.unwrap_or(0.0);
            let chsh = 100.0 * r.chsh_violation_rate;
            vec![
                line("vongher quantum Bell rate", format!("{bell:.1}%"), "91% +- 5".into(), (bell - 91.0).abs() <= 5.0),
                line("vongher quantum CHSH rate", format!("{chsh:.1}%"), "99% +- 3".into(), (chsh - 99.0).abs() <= 3.0),
            ]
        }
        "vongher-partial" => {
            let r = vongher_campaign(&"partial_anticorr:0.87".parse()?, 800, 1000, seed)?;
            let bell = 100.0 * r.bell_violation_rate.unwrap_or(0.0);
            vec![line(
                "vongher partial Bell rate",
                format!("{bell:.1}% (chsh {:.1}%)", 100.0 * r.chsh_violation_rate),
                "87% +- 5".into(),
                (bell - 87.0).abs() <= 5.0,
            )]
        }
        "bellgame" => {
            let table = counterfactual_table();
            let max = table.iter().map(|r| r.score).max().unwrap_or(0);
            let script = play_game(&"scripted".parse()?, 4, &mut SeededRng::new(seed, 0), SettingSource::Script)?;
            let random = play_game(&Strategy::RandomPrograms, 100_000, &mut SeededRng::new(seed, 1), SettingSource::Uniform)?;
            let quantum = play_game(&Strategy::Quantum, 100_000, &mut SeededRng::new(seed, 2), SettingSource::Uniform)?;
            let q = 2.0 + 2f64.sqrt();
            vec![
                line(
                    "bell game table max",
                    format!("{max}"),
                    "3, scores in {1,3}".into(),
                    max == 3 && table.iter().all(|r| r.score == 1 || r.score == 3),
                ),
                line("bell game script points", format!("{}/4", script.points), "4/4".into(), script.points == 4),
                line("bell game random", format!("{:.4}", random.avg_score), "2 +- 0.02".into(), (random.avg_score - 2.0).abs() <= 0.02),
                line("bell game quantum", format!("{:.4}", quantum.avg_score), format!("{q:.4} +- 0.02"), (quantum.avg_score - q).abs() <= 0.02),
            ]
        }
        "no-signaling" => {
            // quantum game: P(a = 1 | x, y) must not depend on y
            let mut rng = SeededRng::new(seed, 0);
            let mut worst = 0.0f64;
            for x in 0..2u8 {
                let mut p = [0.0; 2];
                for y in 0..2u8 {
                    let ones: u64 = (0..n)
                        .map(|_| crate::bellgame::play_round(&Strategy::Quantum, x, y, &mut rng).map(|r| r.a as u64))
                        .sum::<Result<u64>>()?;
                    p[y as usize] = ones as f64 / n as f64;
                }
                let sigma = (2.0 * 0.25 / n as f64).sqrt();
                worst = worst.max((p[0] - p[1]).abs() / sigma);
            }
            vec![line("quantum game marginals", format!("{worst:.2} sigma"), "< 4 sigma".into(), worst < 4.0)]
        }
        "contextual" => {
            let params = ContextualParams::threshold_detection();
            let mut rng = SeededRng::new(seed, 0);
            let mut trials = Vec::with_capacity(1_000_000);
            for _ in 0..1_000_000 {
                let x = Setting(rng.coin() as u8);
                let y = Setting(rng.coin() as u8);
                trials.push(contextual_trial(x, y, &params, &mut rng)?);
            }
            let s = chsh_by_labels(&trials, ChshLabels::default()).s_max().unwrap_or(0.0);
            vec![line("contextual coincidence CHSH", format!("|S| {s:.4}"), ">= 2.2".into(), s >= 2.2)]
        }
        "stats" => {
            let c2 = chebyshev_confidence(2.0, 1.0, 0.0)?.level;
            let c44 = chebyshev_confidence(44.73, 1.0, 0.0)?.level;
            let r = breakdown_demo(&DriftingDeviceSpec::default(), 100, 100_000, seed)?;
            let pooled_z = r.pooled.z;
            let p = r.homogeneity_halves.p_value;
            vec![
                line("chebyshev k=2", format!("{c2}"), "0.75".into(), c2 == 0.75),
                line("chebyshev k=44.7", format!("{c44:.6}"), ">= 0.9995".into(), c44 >= 0.9995),
                line(
                    "breakdown single runs",
                    format!("{} runs beyond 100 SEM", r.rejecting_runs),
                    ">= 3".into(),
                    r.rejecting_runs >= 3,
                ),
                line("breakdown pooled", format!("{pooled_z:.3} SEM"), "|z| < 2".into(), pooled_z.abs() < 2.0),
                line("breakdown homogeneity", format!("p = {p:.3e}"), "< 1e-6".into(), p < 1e-6),
            ]
        }
        other => return Err(invalid(format!("unknown target '{other}'"))),
    })
}

//! Repeated-run challenge protocols: coin-toss subsampling of counterfactual
//! spreadsheets, and the tennis-ball campaign with counter and CHSH tests.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{
    bell_counter_test, chsh, chsh_by_labels, vongher_counters, BellCounterVerdict, ChshEstimate, ChshLabels, CounterSet,
};
use crate::parallel::map_runs;
use crate::rng::SeededRng;
use crate::sources::{
    generate_cfd_spreadsheet, generate_tennis_balls, sample_singlet_pair, InstructionDist, Spreadsheet4, TennisModel,
    TennisVariant,
};
use crate::types::{Angle, Outcome, PairedTrial, Setting};

/// Per row, two fair coins reveal one of `A, A′` and one of `B, B′`; each
/// row lands in exactly one of the four product subsamples.
pub fn gill_subsample(sheet: &Spreadsheet4, rng: &mut SeededRng) -> Result<ChshEstimate> {
    if sheet.is_empty() {
        return Err(invalid("spreadsheet is empty"));
    }
    let mut groups: [Vec<PairedTrial>; 4] = Default::default();
    for row in &sheet.rows {
        let prime_a = rng.coin();
        let prime_b = rng.coin();
        let (sa, a) = if prime_a { (1, row.a_prime) } else { (0, row.a) };
        let (sb, b) = if prime_b { (1, row.b_prime) } else { (0, row.b) };
        let k = 2 * sa as usize + sb as usize;
        groups[k].push(PairedTrial::new(
            Setting(sa),
            Setting(sb),
            Outcome::try_from(a).expect("±1"),
            Outcome::try_from(b).expect("±1"),
        ));
    }
    Ok(chsh([&groups[0], &groups[1], &groups[2], &groups[3]]))
}

/// Named spreadsheet generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GillGenerator {
    /// Uniform over all 16 rows.
    Uniform,
    /// Every row `(+1, +1, +1, +1)`.
    Constant,
    /// Uniform over the eight rows whose combination is `+2`.
    Boundary,
}

impl GillGenerator {
    pub fn distribution(self) -> InstructionDist {
        match self {
            GillGenerator::Uniform => InstructionDist::uniform(),
            GillGenerator::Constant => InstructionDist::point([1, 1, 1, 1]).expect("valid atom"),
            GillGenerator::Boundary => InstructionDist::boundary(),
        }
    }
}

impl FromStr for GillGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(GillGenerator::Uniform),
            "constant" => Ok(GillGenerator::Constant),
            "boundary" | "adversarial" => Ok(GillGenerator::Boundary),
            other => Err(invalid(format!("unknown generator `{other}`"))),
        }
    }
}

impl fmt::Display for GillGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GillGenerator::Uniform => "uniform",
            GillGenerator::Constant => "constant",
            GillGenerator::Boundary => "boundary",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: u64,
    pub s_value: Option<f64>,
    pub chsh_violated: bool,
    pub bell_violated: Option<bool>,
    pub bell_lhs: Option<u64>,
    pub bell_rhs: Option<u64>,
    pub n_ab: u64,
    pub n_ab_prime: u64,
    pub n_a_prime_b: u64,
    pub n_a_prime_b_prime: u64,
}

impl RunRecord {
    fn new(run: u64, est: &ChshEstimate, chsh_violated: bool, bell: Option<BellCounterVerdict>) -> Self {
        let n = est.sample_sizes();
        Self {
            run,
            s_value: est.s_value,
            chsh_violated,
            bell_violated: bell.map(|b| b.violated),
            bell_lhs: bell.map(|b| b.lhs),
            bell_rhs: bell.map(|b| b.rhs),
            n_ab: n[0],
            n_ab_prime: n[1],
            n_a_prime_b: n[2],
            n_a_prime_b_prime: n[3],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub protocol: String,
    pub runs: u64,
    pub seed: u64,
    pub chsh_violations: u64,
    pub chsh_violation_rate: f64,
    /// Runs with `S ≥ 2`, the event bounded by the one-half conjecture.
    pub at_or_above_bound: u64,
    pub bell_violations: Option<u64>,
    pub bell_violation_rate: Option<f64>,
    /// `0.5 + 3·√(0.25 / runs)`.
    pub win_threshold: f64,
    /// The challenge counts as won only if the CHSH violation rate exceeds
    /// the threshold.
    pub qrc_won: bool,
    pub mean_subsample_size: f64,
    pub per_run: Vec<RunRecord>,
}

pub fn win_threshold(runs: u64) -> f64 {
    0.5 + 3.0 * (0.25 / runs as f64).sqrt()
}

impl CampaignReport {
    fn aggregate(protocol: String, seed: u64, per_run: Vec<RunRecord>, at_or_above_bound: u64) -> Self {
        let runs = per_run.len() as u64;
        let chsh_violations = per_run.iter().filter(|r| r.chsh_violated).count() as u64;
        let bell_violations = per_run
            .iter()
            .map(|r| r.bell_violated)
            .collect::<Option<Vec<bool>>>()
            .map(|v| v.iter().filter(|b| **b).count() as u64);
        let total_n: u64 = per_run
            .iter()
            .map(|r| r.n_ab + r.n_ab_prime + r.n_a_prime_b + r.n_a_prime_b_prime)
            .sum();
        let chsh_violation_rate = chsh_violations as f64 / runs as f64;
        let threshold = win_threshold(runs);
        Self {
            protocol,
            runs,
            seed,
            chsh_violations,
            chsh_violation_rate,
            at_or_above_bound,
            bell_violations,
            bell_violation_rate: bell_violations.map(|b| b as f64 / runs as f64),
            win_threshold: threshold,
            qrc_won: chsh_violation_rate > threshold,
            mean_subsample_size: total_n as f64 / (4 * runs) as f64,
            per_run,
        }
    }
}

/// Fresh spreadsheet per run from `dist`, then one coin-toss subsample.
/// Run `r` uses stream `r` of `seed`.
pub fn gill_campaign(dist: &InstructionDist, sheet_size: usize, runs: usize, seed: u64) -> Result<CampaignReport> {
    if runs == 0 {
        return Err(invalid("runs must be at least 1"));
    }
    let results = map_runs(runs, |r| -> Result<(RunRecord, bool)> {
        let mut rng = SeededRng::new(seed, r);
        let sheet = generate_cfd_spreadsheet(sheet_size, dist, &mut rng)?;
        let est = gill_subsample(&sheet, &mut rng)?;
        let violated = est.s_value.is_some_and(|s| s > 2.0);
        let at_bound = est.s_value.is_some_and(|s| s >= 2.0);
        Ok((RunRecord::new(r, &est, violated, None), at_bound))
    });
    let mut per_run = Vec::with_capacity(runs);
    let mut at_bound = 0;
    for r in results {
        let (rec, b) = r?;
        at_bound += b as u64;
        per_run.push(rec);
    }
    Ok(CampaignReport::aggregate("gill".into(), seed, per_run, at_bound))
}

/// Outcome source for the tennis-ball campaign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VongherSource {
    Balls(TennisModel),
    /// Singlet sampler at the angles `aπ/8`, `bπ/8`.
    Quantum,
}

impl VongherSource {
    pub fn name(&self) -> String {
        match self {
            VongherSource::Balls(m) => match m.variant {
                TennisVariant::Strict => "strict".into(),
                TennisVariant::MissingPairs { p_drop } => format!("missing_pairs:{p_drop}"),
                TennisVariant::PartialAnticorr { q } => format!("partial_anticorr:{q}"),
            },
            VongherSource::Quantum => "quantum".into(),
        }
    }
}

impl FromStr for VongherSource {
    type Err = Error;

    /// `strict`, `missing_pairs[:p]`, `partial_anticorr[:q]` or `quantum`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |default: f64| -> Result<f64> {
            arg.map_or(Ok(default), |a| a.trim().parse().map_err(|_| invalid(format!("bad number in `{s}`"))))
        };
        let variant = match kind {
            "quantum" => return Ok(VongherSource::Quantum),
            "strict" => TennisVariant::Strict,
            "missing_pairs" => TennisVariant::MissingPairs { p_drop: num(0.1)? },
            "partial_anticorr" => TennisVariant::PartialAnticorr { q: num(0.87)? },
            other => return Err(invalid(format!("unknown variant `{other}`"))),
        };
        Ok(VongherSource::Balls(TennisModel::new(variant)?))
    }
}

/// CHSH roles for the tennis-ball settings: the minus sign falls on
/// `(a, b) = (3, 0)`, the distance-3 pair.
pub const VONGHER_CHSH_LABELS: ChshLabels = ChshLabels {
    a: Setting(0),
    a_prime: Setting(3),
    b: Setting(2),
    b_prime: Setting(0),
};

/// One sample of `n_pairs` trials; each pair gets one of the four settings
/// uniformly and only the addressed instructions are read.
pub fn vongher_trials(source: &VongherSource, n_pairs: usize, rng: &mut SeededRng) -> Result<Vec<PairedTrial>> {
    if n_pairs == 0 {
        return Err(invalid("n_pairs must be at least 1"));
    }
    let balls = match source {
        VongherSource::Balls(model) => Some(generate_tennis_balls(n_pairs, model, rng)?),
        VongherSource::Quantum => None,
    };
    let mut trials = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let a = if rng.coin() { 3u8 } else { 0 };
        let b = if rng.coin() { 2u8 } else { 0 };
        let (oa, ob) = match &balls {
            Some(balls) => {
                let ball = &balls[i];
                if ball.prepared {
                    (Outcome::from_bit(ball.left(a)), Outcome::from_bit(ball.right(b)))
                } else {
                    (Outcome::NoCount, Outcome::NoCount)
                }
            }
            None => sample_singlet_pair(Angle::new(a as f64 * PI / 8.0), Angle::new(b as f64 * PI / 8.0), rng),
        };
        trials.push(PairedTrial::new(Setting(a), Setting(b), oa, ob));
    }
    Ok(trials)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VongherRun {
    pub counters: CounterSet,
    pub bell: BellCounterVerdict,
    pub chsh: ChshEstimate,
    pub bell_violated: bool,
    pub chsh_violated: bool,
}

pub fn vongher_run(source: &VongherSource, n_pairs: usize, rng: &mut SeededRng) -> Result<VongherRun> {
    let trials = vongher_trials(source, n_pairs, rng)?;
    let counters = vongher_counters(&trials);
    let bell = bell_counter_test(&counters);
    let chsh = chsh_by_labels(&trials, VONGHER_CHSH_LABELS);
    Ok(VongherRun {
        counters,
        bell,
        chsh_violated: chsh.violates(),
        bell_violated: bell.violated,
        chsh,
    })
}

pub fn vongher_campaign(source: &VongherSource, n_pairs: usize, runs: usize, seed: u64) -> Result<CampaignReport> {
    if runs == 0 {
        return Err(invalid("runs must be at least 1"));
    }
    let results = map_runs(runs, |r| {
        let mut rng = SeededRng::new(seed, r);
        vongher_run(source, n_pairs, &mut rng).map(|v| (RunRecord::new(r, &v.chsh, v.chsh_violated, Some(v.bell)), v.chsh.s_value.is_some_and(|s| s.abs() >= 2.0)))
    });
    let mut per_run = Vec::with_capacity(runs);
    let mut at_bound = 0;
    for r in results {
        let (rec, b) = r?;
        at_bound += b as u64;
        per_run.push(rec);
    }
    Ok(CampaignReport::aggregate(format!("vongher:{}", source.name()), seed, per_run, at_bound))
}

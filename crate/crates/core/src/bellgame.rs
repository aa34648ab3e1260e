//! Bell's game: two boxes, binary settings `x, y` and binary outputs
//! `a, b`. A round scores a point when `(a + b) mod 2 = x·y`.

use std::f64::consts::FRAC_PI_8;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SeededRng;

/// One of the four deterministic local programs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct LocalProgram(u8);

impl LocalProgram {
    pub const ALL: [LocalProgram; 4] = [LocalProgram(1), LocalProgram(2), LocalProgram(3), LocalProgram(4)];

    pub fn new(id: u8) -> Result<Self> {
        if (1..=4).contains(&id) {
            Ok(Self(id))
        } else {
            Err(invalid(format!("program id {id} not in 1..=4")))
        }
    }

    pub fn id(self) -> u8 {
        self.0
    }

    /// 1: always 0, 2: always 1, 3: copy the setting, 4: negate it.
    pub fn output(self, setting: u8) -> u8 {
        match self.0 {
            1 => 0,
            2 => 1,
            3 => setting,
            _ => 1 - setting,
        }
    }
}

impl TryFrom<u8> for LocalProgram {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LocalProgram> for u8 {
    fn from(p: LocalProgram) -> u8 {
        p.0
    }
}

pub fn point_rule(x: u8, y: u8, a: u8, b: u8) -> bool {
    (a + b) % 2 == x * y
}

/// The four settings in table order `(0,0), (0,1), (1,0), (1,1)`.
pub const SETTINGS: [(u8, u8); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterfactualRow {
    pub i: u8,
    pub j: u8,
    pub outcomes: [(u8, u8); 4],
    pub score: u8,
}

/// All 16 program pairs evaluated at all four settings.
pub fn counterfactual_table() -> Vec<CounterfactualRow> {
    let mut rows = Vec::with_capacity(16);
    for pi in LocalProgram::ALL {
        for pj in LocalProgram::ALL {
            let outcomes = SETTINGS.map(|(x, y)| (pi.output(x), pj.output(y)));
            let score = SETTINGS
                .iter()
                .zip(outcomes)
                .filter(|((x, y), (a, b))| point_rule(*x, *y, *a, *b))
                .count() as u8;
            rows.push(CounterfactualRow {
                i: pi.id(),
                j: pj.id(),
                outcomes,
                score,
            });
        }
    }
    rows
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptStep {
    pub i: u8,
    pub j: u8,
    pub x: u8,
    pub y: u8,
}

/// Four consecutive minutes in which every round scores.
pub fn table2_script() -> Vec<ScriptStep> {
    [(1, 1, 0, 0), (2, 2, 0, 1), (4, 3, 1, 1), (3, 4, 1, 0)]
        .into_iter()
        .map(|(i, j, x, y)| ScriptStep { i, j, x, y })
        .collect()
}

/// Programs chosen from correlated source signals and setting microstates:
/// `i = f(λ1, λx)`, `j = g(λ2, λy)` with `λ1 = λ2` uniform on `[0, 1)` and
/// `λx` uniform on `[x/2, x/2 + 1/2)` (likewise `λy`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameContextual {
    /// Phase added on the right before selecting a program.
    pub offset: f64,
}

impl Default for GameContextual {
    fn default() -> Self {
        Self { offset: 0.25 }
    }
}

impl GameContextual {
    fn select(u: f64) -> LocalProgram {
        let k = ((u.rem_euclid(1.0)) * 4.0) as u8;
        LocalProgram(1 + k.min(3))
    }

    pub fn f(&self, lambda1: f64, lambda_x: f64) -> LocalProgram {
        Self::select(lambda1 + lambda_x)
    }

    pub fn g(&self, lambda2: f64, lambda_y: f64) -> LocalProgram {
        Self::select(lambda2 + lambda_y + self.offset)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Strategy {
    Fixed { i: LocalProgram, j: LocalProgram },
    RandomPrograms,
    Scripted { steps: Vec<ScriptStep> },
    Contextual(GameContextual),
    /// Samples `(a, b)` with uniform marginals and
    /// `P((a + b) mod 2 = x·y) = cos²(π/8)`.
    Quantum,
}

impl Strategy {
    pub fn name(&self) -> String {
        match self {
            Strategy::Fixed { i, j } => format!("fixed:{},{}", i.id(), j.id()),
            Strategy::RandomPrograms => "random".into(),
            Strategy::Scripted { .. } => "scripted".into(),
            Strategy::Contextual(_) => "contextual".into(),
            Strategy::Quantum => "quantum".into(),
        }
    }

    pub fn is_local(&self) -> bool {
        !matches!(self, Strategy::Quantum)
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// `fixed:i,j`, `random`, `scripted`, `contextual` or `quantum`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Strategy::RandomPrograms),
            "scripted" => Ok(Strategy::Scripted { steps: table2_script() }),
            "contextual" => Ok(Strategy::Contextual(GameContextual::default())),
            "quantum" => Ok(Strategy::Quantum),
            _ => {
                let spec = s
                    .strip_prefix("fixed:")
                    .ok_or_else(|| invalid(format!("unknown strategy `{s}`")))?;
                let (i, j) = spec
                    .split_once(',')
                    .ok_or_else(|| invalid(format!("`{s}`: expected fixed:i,j")))?;
                let p = |v: &str| -> Result<LocalProgram> {
                    LocalProgram::new(v.trim().parse().map_err(|_| invalid(format!("bad program id `{v}`")))?)
                };
                Ok(Strategy::Fixed { i: p(i)?, j: p(j)? })
            }
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// One minute of play. `i`, `j` are empty for the quantum strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub minute: u64,
    pub i: Option<u8>,
    pub j: Option<u8>,
    pub x: u8,
    pub y: u8,
    pub a: u8,
    pub b: u8,
    pub point: u8,
}

/// Stateful player; scripted strategies advance one step per round and wrap.
#[derive(Clone, Debug)]
pub struct Player {
    strategy: Strategy,
    minute: u64,
}

impl Player {
    pub fn new(strategy: Strategy) -> Result<Self> {
        if let Strategy::Scripted { steps } = &strategy {
            if steps.is_empty() {
                return Err(invalid("scripted strategy needs at least one step"));
            }
            for s in steps {
                LocalProgram::new(s.i)?;
                LocalProgram::new(s.j)?;
                if s.x > 1 || s.y > 1 {
                    return Err(invalid("script settings must be 0 or 1"));
                }
            }
        }
        Ok(Self { strategy, minute: 0 })
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    /// Settings the script prescribes for the next round, if scripted.
    pub fn scripted_settings(&self) -> Option<(u8, u8)> {
        match &self.strategy {
            Strategy::Scripted { steps } => {
                let s = steps[(self.minute as usize) % steps.len()];
                Some((s.x, s.y))
            }
            _ => None,
        }
    }

    pub fn play_round(&mut self, x: u8, y: u8, rng: &mut SeededRng) -> Result<Round> {
        if x > 1 || y > 1 {
            return Err(invalid("settings must be 0 or 1"));
        }
        self.minute += 1;
        let programs = match &self.strategy {
            Strategy::Fixed { i, j } => Some((*i, *j)),
            Strategy::RandomPrograms => {
                let i = LocalProgram::ALL[rng.index(4)];
                let j = LocalProgram::ALL[rng.index(4)];
                Some((i, j))
            }
            Strategy::Scripted { steps } => {
                let s = steps[((self.minute - 1) as usize) % steps.len()];
                Some((LocalProgram(s.i), LocalProgram(s.j)))
            }
            Strategy::Contextual(c) => {
                let lambda = rng.uniform();
                let lx = 0.5 * x as f64 + 0.5 * rng.uniform();
                let ly = 0.5 * y as f64 + 0.5 * rng.uniform();
                Some((c.f(lambda, lx), c.g(lambda, ly)))
            }
            Strategy::Quantum => None,
        };
        let (a, b) = match programs {
            Some((pi, pj)) => (pi.output(x), pj.output(y)),
            None => {
                let a = rng.coin() as u8;
                let win = rng.bernoulli(FRAC_PI_8.cos().powi(2));
                (a, a ^ (x * y) ^ (!win as u8))
            }
        };
        Ok(Round {
            minute: self.minute,
            i: programs.map(|p| p.0.id()),
            j: programs.map(|p| p.1.id()),
            x,
            y,
            a,
            b,
            point: point_rule(x, y, a, b) as u8,
        })
    }
}

/// Single-round entry point for a fresh player.
pub fn play_round(strategy: &Strategy, x: u8, y: u8, rng: &mut SeededRng) -> Result<Round> {
    Player::new(strategy.clone())?.play_round(x, y, rng)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingSource {
    /// Fresh uniform `(x, y)` each round.
    Uniform,
    /// The settings written in a scripted strategy.
    Script,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub strategy: String,
    pub rounds: u64,
    pub points: u64,
    /// `4 × points / rounds`, on the same scale as a counterfactual row score.
    pub avg_score: f64,
    #[serde(skip)]
    pub log: Vec<Round>,
}

pub fn play_game(strategy: &Strategy, rounds: u64, rng: &mut SeededRng, source: SettingSource) -> Result<GameReport> {
    if rounds == 0 {
        return Err(invalid("rounds must be at least 1"));
    }
    let mut player = Player::new(strategy.clone())?;
    if source == SettingSource::Script && player.scripted_settings().is_none() {
        return Err(invalid("script settings require a scripted strategy"));
    }
    let mut log = Vec::with_capacity(rounds as usize);
    for _ in 0..rounds {
        let (x, y) = match source {
            SettingSource::Script => player.scripted_settings().expect("checked"),
            SettingSource::Uniform => (rng.coin() as u8, rng.coin() as u8),
        };
        log.push(player.play_round(x, y, rng)?);
    }
    let points = log.iter().map(|r| r.point as u64).sum();
    Ok(GameReport {
        strategy: strategy.name(),
        rounds,
        points,
        avg_score: 4.0 * points as f64 / rounds as f64,
        log,
    })
}

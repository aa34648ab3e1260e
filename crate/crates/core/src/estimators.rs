//! Finite-sample inequality statistics: correlations, CHSH, the Vongher
//! counter inequality and Eberhard's `J`.

use serde::{Deserialize, Serialize};

use crate::sources::{BallPair, Spreadsheet4};
use crate::types::{Outcome, PairedTrial, Setting};

/// Mean of `a·b` over trials where both stations counted; `None` when there
/// are no such trials.
pub fn correlation(trials: &[PairedTrial]) -> Option<f64> {
    term(trials.iter()).value
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub value: Option<f64>,
    pub n: u64,
}

fn term<'a>(trials: impl Iterator<Item = &'a PairedTrial>) -> TermEstimate {
    let (mut n, mut s) = (0u64, 0i64);
    for p in trials.filter_map(PairedTrial::product) {
        n += 1;
        s += p as i64;
    }
    TermEstimate {
        value: (n > 0).then(|| s as f64 / n as f64),
        n,
    }
}

/// Estimates of `⟨AB⟩, ⟨AB′⟩, ⟨A′B⟩, ⟨A′B′⟩` and
/// `S = ⟨AB⟩ + ⟨AB′⟩ + ⟨A′B⟩ − ⟨A′B′⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    pub e_ab: TermEstimate,
    pub e_ab_prime: TermEstimate,
    pub e_a_prime_b: TermEstimate,
    pub e_a_prime_b_prime: TermEstimate,
    pub s_value: Option<f64>,
}

impl ChshEstimate {
    pub fn from_terms(terms: [TermEstimate; 4]) -> Self {
        let s_value = match (terms[0].value, terms[1].value, terms[2].value, terms[3].value) {
            (Some(a), Some(b), Some(c), Some(d)) => Some(a + b + c - d),
            _ => None,
        };
        Self {
            e_ab: terms[0],
            e_ab_prime: terms[1],
            e_a_prime_b: terms[2],
            e_a_prime_b_prime: terms[3],
            s_value,
        }
    }

    pub fn terms(&self) -> [TermEstimate; 4] {
        [self.e_ab, self.e_ab_prime, self.e_a_prime_b, self.e_a_prime_b_prime]
    }

    /// `max |S|` over the four placements of the minus sign; `None` if any
    /// term is undefined.
    pub fn s_max(&self) -> Option<f64> {
        let v: Vec<f64> = self.terms().iter().map(|t| t.value).collect::<Option<_>>()?;
        let total: f64 = v.iter().sum();
        Some(v.iter().map(|x| (total - 2.0 * x).abs()).fold(0.0, f64::max))
    }

    /// Strict violation `|S| > 2` of the fixed-form statistic.
    pub fn violates(&self) -> bool {
        self.s_value.is_some_and(|s| s.abs() > 2.0)
    }

    pub fn sample_sizes(&self) -> [u64; 4] {
        self.terms().map(|t| t.n)
    }
}

/// Which setting labels play the roles `A, A′` (left) and `B, B′` (right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChshLabels {
    pub a: Setting,
    pub a_prime: Setting,
    pub b: Setting,
    pub b_prime: Setting,
}

impl Default for ChshLabels {
    fn default() -> Self {
        Self {
            a: Setting(0),
            a_prime: Setting(1),
            b: Setting(0),
            b_prime: Setting(1),
        }
    }
}

/// CHSH from four pre-grouped samples in the order `AB, AB′, A′B, A′B′`.
pub fn chsh(groups: [&[PairedTrial]; 4]) -> ChshEstimate {
    ChshEstimate::from_terms(groups.map(|g| term(g.iter())))
}

/// CHSH after grouping a mixed trial list by its setting labels. Trials at
/// other labels are ignored.
pub fn chsh_by_labels(trials: &[PairedTrial], labels: ChshLabels) -> ChshEstimate {
    let pick = |x: Setting, y: Setting| term(trials.iter().filter(move |t| t.setting_a == x && t.setting_b == y));
    ChshEstimate::from_terms([
        pick(labels.a, labels.b),
        pick(labels.a, labels.b_prime),
        pick(labels.a_prime, labels.b),
        pick(labels.a_prime, labels.b_prime),
    ])
}

/// CHSH over a whole counterfactual spreadsheet, every product of every row.
pub fn chsh_full_table(sheet: &Spreadsheet4) -> ChshEstimate {
    let n = sheet.rows.len() as u64;
    let mut sums = [0i64; 4];
    for r in &sheet.rows {
        for (s, p) in sums.iter_mut().zip(r.products()) {
            *s += p as i64;
        }
    }
    let mut est = ChshEstimate::from_terms(sums.map(|s| TermEstimate {
        value: (n > 0).then(|| s as f64 / n as f64),
        n,
    }));
    // one division of the integer total, so the ±2 bound holds exactly
    est.s_value = (n > 0).then(|| (sums[0] + sums[1] + sums[2] - sums[3]) as f64 / n as f64);
    est
}

/// Equal/unequal counters per setting distance `d ∈ {0,1,2,3}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSet {
    pub n_e: [u64; 4],
    pub n_u: [u64; 4],
}

impl CounterSet {
    pub fn record(&mut self, d: usize, equal: bool) {
        if equal {
            self.n_e[d] += 1;
        } else {
            self.n_u[d] += 1;
        }
    }

    pub fn pairs_at(&self, d: usize) -> u64 {
        self.n_e[d] + self.n_u[d]
    }
}

/// Vongher setting labels: left `a ∈ {0, 3}`, right `b ∈ {0, 2}`,
/// angles `aπ/8` and `bπ/8`.
pub const VONGHER_LEFT: [u8; 2] = [0, 3];
pub const VONGHER_RIGHT: [u8; 2] = [0, 2];

/// Setting distance `|b − a|`, or `None` for labels outside the scheme.
pub fn vongher_distance(sa: Setting, sb: Setting) -> Option<usize> {
    (VONGHER_LEFT.contains(&sa.0) && VONGHER_RIGHT.contains(&sb.0)).then(|| sa.0.abs_diff(sb.0) as usize)
}

/// Counts equal/unequal outcomes by setting distance; trials with a
/// no-count outcome or non-Vongher labels are skipped.
pub fn vongher_counters(trials: &[PairedTrial]) -> CounterSet {
    let mut c = CounterSet::default();
    for t in trials {
        if !t.is_coincidence() {
            continue;
        }
        if let Some(d) = vongher_distance(t.setting_a, t.setting_b) {
            c.record(d, t.a == t.b);
        }
    }
    c
}

/// Counts every prepared ball at all four setting pairs.
pub fn counterfactual_counters(balls: &[BallPair]) -> CounterSet {
    let mut c = CounterSet::default();
    for ball in balls.iter().filter(|b| b.prepared) {
        for a in VONGHER_LEFT {
            for b in VONGHER_RIGHT {
                c.record(a.abs_diff(b) as usize, ball.left(a) == ball.right(b));
            }
        }
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellCounterVerdict {
    pub lhs: u64,
    pub rhs: u64,
    pub violated: bool,
}

/// `N_1(U) ≤ N_2(E) + N_3(U)`; violated iff the left side is strictly larger.
pub fn bell_counter_test(c: &CounterSet) -> BellCounterVerdict {
    let lhs = c.n_u[1];
    let rhs = c.n_e[2] + c.n_u[3];
    BellCounterVerdict {
        lhs,
        rhs,
        violated: lhs > rhs,
    }
}

/// The six ingredients of Eberhard's `J`. `o` is the `+1` beam, `e` the `−1`
/// beam, `u` undetected; subscripts are (left, right) setting indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EberhardCounts {
    pub n_oo_11: u64,
    pub n_oe_12: u64,
    pub n_ou_12: u64,
    pub n_eo_21: u64,
    pub n_uo_21: u64,
    pub n_oo_22: u64,
}

/// `J = n_oe_12 + n_ou_12 + n_eo_21 + n_uo_21 + n_oo_22 − n_oo_11`.
///
/// This is the standard Eberhard combination; `J ≥ 0` for any table of
/// predetermined outcomes and detections.
pub fn eberhard_j(c: &EberhardCounts) -> i64 {
    (c.n_oe_12 + c.n_ou_12 + c.n_eo_21 + c.n_uo_21 + c.n_oo_22) as i64 - c.n_oo_11 as i64
}

/// Maps setting labels to Eberhard subscripts 1 and 2 on each side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EberhardMapping {
    pub a1: Setting,
    pub a2: Setting,
    pub b1: Setting,
    pub b2: Setting,
}

impl Default for EberhardMapping {
    fn default() -> Self {
        Self {
            a1: Setting(0),
            a2: Setting(1),
            b1: Setting(0),
            b2: Setting(1),
        }
    }
}

pub fn eberhard_counts(trials: &[PairedTrial], map: EberhardMapping) -> EberhardCounts {
    use Outcome::{Minus as E, NoCount as U, Plus as O};
    let mut c = EberhardCounts::default();
    for t in trials {
        let at = |x: Setting, y: Setting| t.setting_a == x && t.setting_b == y;
        match (t.a, t.b) {
            (O, O) if at(map.a1, map.b1) => c.n_oo_11 += 1,
            (O, O) if at(map.a2, map.b2) => c.n_oo_22 += 1,
            (O, E) if at(map.a1, map.b2) => c.n_oe_12 += 1,
            (O, U) if at(map.a1, map.b2) => c.n_ou_12 += 1,
            (E, O) if at(map.a2, map.b1) => c.n_eo_21 += 1,
            (U, O) if at(map.a2, map.b1) => c.n_uo_21 += 1,
            _ => {}
        }
    }
    c
}

/// Predetermined outcome-and-detection row: `[A1, A2, B1, B2]`.
pub type DetectionRow = [Outcome; 4];

/// Counts every row at all four setting pairs.
pub fn counterfactual_eberhard(rows: &[DetectionRow]) -> EberhardCounts {
    let map = EberhardMapping::default();
    let mut trials = Vec::with_capacity(rows.len() * 4);
    for r in rows {
        for (x, a) in [(map.a1, r[0]), (map.a2, r[1])] {
            for (y, b) in [(map.b1, r[2]), (map.b2, r[3])] {
                trials.push(PairedTrial::new(x, y, a, b));
            }
        }
    }
    eberhard_counts(&trials, map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use crate::sources::{generate_cfd_spreadsheet, sample_singlet_pair, InstructionDist};
    use crate::types::Angle;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn t(sa: u8, sb: u8, a: i8, b: i8) -> PairedTrial {
        PairedTrial::new(Setting(sa), Setting(sb), Outcome::try_from(a).unwrap(), Outcome::try_from(b).unwrap())
    }

    #[test]
    fn correlation_basic() {
        assert_eq!(correlation(&[t(0, 0, 1, -1); 5]), Some(-1.0));
        assert_eq!(correlation(&[t(0, 0, 0, -1), t(0, 0, 1, 0)]), None);
        assert_eq!(correlation(&[]), None);
    }

    #[test]
    fn correlation_singlet_aligned_is_exact() {
        let mut rng = SeededRng::new(2, 0);
        let trials: Vec<_> = (0..100_000)
            .map(|_| {
                let (a, b) = sample_singlet_pair(Angle::new(1.0), Angle::new(1.0), &mut rng);
                PairedTrial::new(Setting(0), Setting(0), a, b)
            })
            .collect();
        assert_eq!(correlation(&trials), Some(-1.0));
    }

    #[test]
    fn chsh_undefined_term() {
        let g1 = [t(0, 0, 1, 1)];
        let e = chsh([&g1, &g1, &g1, &[]]);
        assert_eq!(e.s_value, None);
        assert_eq!(e.s_max(), None);
        assert!(!e.violates());
    }

    /// Closed-form singlet expectations at the textbook angles.
    #[test]
    fn chsh_singlet_closed_form() {
        let e = |x: f64, y: f64| TermEstimate {
            value: Some(-(x - y).cos()),
            n: 1,
        };
        let (a, a2, b, b2) = (0.0, FRAC_PI_2, FRAC_PI_4, 3.0 * FRAC_PI_4);
        let est = ChshEstimate::from_terms([e(a, b), e(a, b2), e(a2, b), e(a2, b2)]);
        assert!((est.s_max().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        // the fixed form is maximal once A and A′ swap roles
        let swapped = ChshEstimate::from_terms([e(a2, b), e(a2, b2), e(a, b), e(a, b2)]);
        assert!((swapped.s_value.unwrap() + 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn chsh_by_labels_groups() {
        let trials = vec![t(0, 0, 1, 1), t(0, 1, 1, -1), t(1, 0, 1, 1), t(1, 1, -1, -1), t(7, 7, 1, 1)];
        let e = chsh_by_labels(&trials, ChshLabels::default());
        assert_eq!(e.sample_sizes(), [1, 1, 1, 1]);
        assert_eq!(e.s_value, Some(1.0 - 1.0 + 1.0 - 1.0));
    }

    #[test]
    fn full_table_bound_uniform() {
        let mut rng = SeededRng::new(0, 0);
        for _ in 0..50 {
            let s = generate_cfd_spreadsheet(400, &InstructionDist::uniform(), &mut rng).unwrap();
            assert!(chsh_full_table(&s).s_value.unwrap() <= 2.0);
        }
    }

    #[test]
    fn counters_single_pair() {
        // bits (0, 1) map to outcomes (−1, +1); a=3, b=2 gives d=1
        let c = vongher_counters(&[t(3, 2, -1, 1)]);
        assert_eq!(c.n_u[1], 1);
        assert_eq!(c.n_u.iter().sum::<u64>() + c.n_e.iter().sum::<u64>(), 1);
    }

    #[test]
    fn counters_skip_no_count_and_foreign_labels() {
        let c = vongher_counters(&[t(0, 0, 0, 0), t(1, 1, 1, 1), t(0, 2, 1, 1)]);
        assert_eq!(c.n_e[2], 1);
        assert_eq!(c.pairs_at(0), 0);
    }

    #[test]
    fn bell_counter_examples() {
        assert!(!bell_counter_test(&CounterSet::default()).violated);
        let c = CounterSet {
            n_e: [0, 0, 29, 0],
            n_u: [0, 192, 0, 138],
        };
        let v = bell_counter_test(&c);
        assert_eq!((v.lhs, v.rhs, v.violated), (192, 167, true));
    }

    /// Direct evaluation of the singlet law: P_d(U) = cos²(dπ/16) on 200
    /// pairs per distance.
    #[test]
    fn bell_counter_expected_singlet_counts() {
        let pu = |d: f64| (d * PI / 16.0).cos().powi(2);
        let n1u = (200.0 * pu(1.0)).round();
        let n2e = (200.0 * (1.0 - pu(2.0))).round();
        let n3u = (200.0 * pu(3.0)).round();
        assert_eq!((n1u, n2e, n3u), (192.0, 29.0, 138.0));
    }

    #[test]
    fn eberhard_arithmetic() {
        assert_eq!(eberhard_j(&EberhardCounts::default()), 0);
        assert_eq!(
            eberhard_j(&EberhardCounts {
                n_oo_11: 10,
                ..Default::default()
            }),
            -10
        );
    }

    #[test]
    fn eberhard_counts_mapping() {
        let trials = vec![t(0, 0, 1, 1), t(0, 1, 1, -1), t(0, 1, 1, 0), t(1, 0, -1, 1), t(1, 0, 0, 1), t(1, 1, 1, 1), t(1, 1, -1, -1)];
        let c = eberhard_counts(&trials, EberhardMapping::default());
        assert_eq!(
            c,
            EberhardCounts {
                n_oo_11: 1,
                n_oe_12: 1,
                n_ou_12: 1,
                n_eo_21: 1,
                n_uo_21: 1,
                n_oo_22: 1
            }
        );
        assert_eq!(eberhard_j(&c), 4);
    }

    #[test]
    fn counterfactual_j_exhaustive() {
        // all 81 predetermined rows individually
        let vals = [Outcome::Plus, Outcome::Minus, Outcome::NoCount];
        for a1 in vals {
            for a2 in vals {
                for b1 in vals {
                    for b2 in vals {
                        assert!(eberhard_j(&counterfactual_eberhard(&[[a1, a2, b1, b2]])) >= 0);
                    }
                }
            }
        }
    }
}

//! Counterfactual `n × 4` spreadsheets of predetermined ±1 outcomes for the
//! observables `A, A′, B, B′`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CfdRow {
    pub a: i8,
    pub a_prime: i8,
    pub b: i8,
    pub b_prime: i8,
}

impl CfdRow {
    pub fn new(values: [i8; 4]) -> Result<Self> {
        if values.iter().any(|v| *v != 1 && *v != -1) {
            return Err(Error::InvalidDistribution(format!("{values:?}")));
        }
        Ok(Self {
            a: values[0],
            a_prime: values[1],
            b: values[2],
            b_prime: values[3],
        })
    }

    /// `AB + AB′ + A′B − A′B′`, always `+2` or `−2`.
    pub fn combination(&self) -> i8 {
        self.a * self.b + self.a * self.b_prime + self.a_prime * self.b - self.a_prime * self.b_prime
    }

    /// The four products in the order `AB, AB′, A′B, A′B′`.
    pub fn products(&self) -> [i8; 4] {
        [
            self.a * self.b,
            self.a * self.b_prime,
            self.a_prime * self.b,
            self.a_prime * self.b_prime,
        ]
    }

    /// All 16 atoms of `{+1,−1}^4`.
    pub fn all() -> impl Iterator<Item = CfdRow> {
        (0..16u8).map(|m| {
            let bit = |k: u8| if m >> k & 1 == 1 { 1 } else { -1 };
            CfdRow {
                a: bit(3),
                a_prime: bit(2),
                b: bit(1),
                b_prime: bit(0),
            }
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Spreadsheet4 {
    pub rows: Vec<CfdRow>,
}

impl Spreadsheet4 {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Discrete distribution over spreadsheet rows.
#[derive(Clone, Debug, PartialEq)]
pub struct InstructionDist {
    atoms: Vec<CfdRow>,
    cumulative: Vec<f64>,
}

impl InstructionDist {
    /// Builds from raw `(values, weight)` pairs. Atoms with an entry outside
    /// `{+1, −1}` and carrying positive weight are rejected.
    pub fn from_weights(weights: &[([i8; 4], f64)]) -> Result<Self> {
        let mut atoms = Vec::new();
        let mut cumulative = Vec::new();
        let mut total = 0.0;
        for (values, w) in weights {
            if !(w.is_finite() && *w >= 0.0) {
                return Err(invalid(format!("weight {w} for atom {values:?}")));
            }
            if *w == 0.0 {
                continue;
            }
            atoms.push(CfdRow::new(*values)?);
            total += w;
            cumulative.push(total);
        }
        if total <= 0.0 {
            return Err(invalid("instruction distribution has no mass"));
        }
        for c in &mut cumulative {
            *c /= total;
        }
        Ok(Self { atoms, cumulative })
    }

    pub fn point(row: [i8; 4]) -> Result<Self> {
        Self::from_weights(&[(row, 1.0)])
    }

    pub fn uniform() -> Self {
        Self::from_rows(CfdRow::all().collect())
    }

    /// Uniform over the eight atoms whose combination is `+2`.
    pub fn boundary() -> Self {
        Self::from_rows(CfdRow::all().filter(|r| r.combination() == 2).collect())
    }

    fn from_rows(atoms: Vec<CfdRow>) -> Self {
        let n = atoms.len() as f64;
        let cumulative = (1..=atoms.len()).map(|k| k as f64 / n).collect();
        Self { atoms, cumulative }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (CfdRow, f64)> + '_ {
        let mut prev = 0.0;
        self.atoms.iter().zip(&self.cumulative).map(move |(a, c)| {
            let p = c - prev;
            prev = *c;
            (*a, p)
        })
    }

    pub fn sample(&self, rng: &mut SeededRng) -> CfdRow {
        let u = rng.uniform();
        let k = self.cumulative.partition_point(|c| *c <= u).min(self.atoms.len() - 1);
        self.atoms[k]
    }
}

/// `n_rows` rows drawn i.i.d. from `dist`.
pub fn generate_cfd_spreadsheet(n_rows: usize, dist: &InstructionDist, rng: &mut SeededRng) -> Result<Spreadsheet4> {
    if n_rows == 0 {
        return Err(invalid("n_rows must be at least 1"));
    }
    Ok(Spreadsheet4 {
        rows: (0..n_rows).map(|_| dist.sample(rng)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn point_mass_row() {
        let d = InstructionDist::point([1, 1, 1, 1]).unwrap();
        let s = generate_cfd_spreadsheet(1, &d, &mut SeededRng::new(0, 0)).unwrap();
        assert_eq!(s.rows.len(), 1);
        assert_eq!(s.rows[0].combination(), 2);
    }

    #[test]
    fn rejects_mass_outside_cube() {
        assert!(matches!(
            InstructionDist::from_weights(&[([1, 0, 1, 1], 0.5), ([1, 1, 1, 1], 0.5)]),
            Err(Error::InvalidDistribution(_))
        ));
        assert!(InstructionDist::from_weights(&[([2, 1, 1, 1], 1.0)]).is_err());
        // zero weight on an invalid atom carries no mass
        assert!(InstructionDist::from_weights(&[([2, 1, 1, 1], 0.0), ([1, 1, 1, 1], 1.0)]).is_ok());
    }

    #[test]
    fn rejects_zero_rows() {
        assert!(generate_cfd_spreadsheet(0, &InstructionDist::uniform(), &mut SeededRng::new(0, 0)).is_err());
    }

    #[test]
    fn every_atom_has_combination_two() {
        let all: Vec<_> = CfdRow::all().collect();
        assert_eq!(all.len(), 16);
        assert!(all.iter().all(|r| r.combination().abs() == 2));
        assert_eq!(all.iter().filter(|r| r.combination() == 2).count(), 8);
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let d = InstructionDist::uniform();
        let mut rng = SeededRng::new(3, 0);
        let n = 160_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..n {
            *counts.entry(d.sample(&mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 16);
        let sd = (n as f64 / 16.0 * (15.0 / 16.0)).sqrt();
        for c in counts.values() {
            assert!((*c as f64 - n as f64 / 16.0).abs() < 4.5 * sd);
        }
    }

    fn weights() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, 16).prop_filter("mass", |w| w.iter().sum::<f64>() > 1e-6)
    }

    proptest! {
        #[test]
        fn row_identity_holds(w in weights(), n in 1usize..300, seed in any::<u64>()) {
            let pairs: Vec<_> = CfdRow::all()
                .zip(w)
                .map(|(r, w)| ([r.a, r.a_prime, r.b, r.b_prime], w))
                .collect();
            let d = InstructionDist::from_weights(&pairs).unwrap();
            let s = generate_cfd_spreadsheet(n, &d, &mut SeededRng::new(seed, 0)).unwrap();
            prop_assert!(s.rows.iter().all(|r| r.combination().abs() == 2));
        }
    }
}

//! Finite-shot simulation of the joint POVM experiment.
//!
//! Counts are drawn from a multinomial over the flattened probability table
//! (row-major, subsystem A slow) by conditional binomials:
//! `count_k ~ Binomial(N − Σ_{l<k} count_l, p_k / Σ_{l≥k} p_l)`, the last cell
//! taking the remainder. The random source is ChaCha20 (`rand_chacha`)
//! seeded from a `u64`; bootstrap resamples use stream 1 of the same key.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::witness::{y_from_probabilities, JointProbabilityTable};

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 500;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    n_a: usize,
    n_b: usize,
    counts: Vec<u64>,
    shots: u64,
}

impl ShotRecord {
    pub fn new(n_a: usize, n_b: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != n_a * n_b {
            return Err(Error::DimensionMismatch(format!(
                "{n_a}x{n_b} record needs {} counts, got {}",
                n_a * n_b,
                counts.len()
            )));
        }
        let shots = counts.iter().sum();
        Ok(Self { n_a, n_b, counts, shots })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_a, self.n_b)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n_b + j]
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn frequencies(&self) -> Result<JointProbabilityTable> {
        JointProbabilityTable::from_counts(self.n_a, self.n_b, &self.counts)
    }

    /// CSV with header `i,j,count`; outcome indices are 1-based.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["i", "j", "count"]).map_err(csv_err)?;
        for i in 0..self.n_a {
            for j in 0..self.n_b {
                wtr.write_record(&[(i + 1).to_string(), (j + 1).to_string(), self.count(i, j).to_string()])
                    .map_err(csv_err)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the format written by [`ShotRecord::write_csv`]; the table shape
    /// is the largest `(i, j)` seen and missing cells count as zero.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            i: usize,
            j: usize,
            count: u64,
        }
        let mut rows = Vec::new();
        for row in csv::Reader::from_reader(r).deserialize::<Row>() {
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            if row.i == 0 || row.j == 0 {
                return Err(Error::Parse("outcome indices are 1-based".into()));
            }
            rows.push(row);
        }
        let n_a = rows.iter().map(|r| r.i).max().unwrap_or(0);
        let n_b = rows.iter().map(|r| r.j).max().unwrap_or(0);
        let mut counts = vec![0; n_a * n_b];
        for r in rows {
            counts[(r.i - 1) * n_b + (r.j - 1)] += r.count;
        }
        Self::new(n_a, n_b, counts)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub i_ph_hat: f64,
    pub y_hat: [f64; 3],
    pub std_error: f64,
    pub shots: u64,
    pub bootstrap_resamples: usize,
    pub seed: u64,
}

fn multinomial(n: u64, probs: &[f64], rng: &mut ChaCha20Rng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass: f64 = probs.iter().sum();
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k + 1 == probs.len() {
            counts[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        counts[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    counts
}

/// Multinomial draw of `shots` outcomes from `table`. Negative roundoff
/// entries are clamped to zero and the table renormalized.
pub fn sample_shots(table: &JointProbabilityTable, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let clamped: Vec<f64> = table.as_slice().iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    let probs: Vec<f64> = clamped.iter().map(|p| p / total).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (n_a, n_b) = table.shape();
    ShotRecord::new(n_a, n_b, multinomial(shots, &probs, &mut rng))
}

/// Plug-in estimate with the default bootstrap (500 resamples, seed 0).
pub fn estimate_i_ph(record: &ShotRecord) -> Result<EstimateReport> {
    estimate_i_ph_with(record, DEFAULT_BOOTSTRAP_RESAMPLES, 0)
}

/// Plug-in estimate: empirical frequencies → Y-triple → `Y₁²+Y₂²−Y₃²`.
/// The standard error is the sample standard deviation of the estimator
/// over `resamples` multinomial resamples of the empirical distribution.
pub fn estimate_i_ph_with(record: &ShotRecord, resamples: usize, seed: u64) -> Result<EstimateReport> {
    if record.shots() == 0 {
        return Err(Error::InvalidParameter("record has zero shots".into()));
    }
    let freq = record.frequencies()?;
    let y = y_from_probabilities(&freq)?;
    let (n_a, n_b) = record.shape();

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut values = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let counts = multinomial(record.shots(), freq.as_slice(), &mut rng);
        let t = JointProbabilityTable::from_counts(n_a, n_b, &counts)?;
        values.push(y_from_probabilities(&t)?.i_ph());
    }
    let std_error = if values.len() > 1 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
        var.sqrt()
    } else {
        0.0
    };
    Ok(EstimateReport {
        i_ph_hat: y.i_ph(),
        y_hat: y.to_array(),
        std_error,
        shots: record.shots(),
        bootstrap_resamples: resamples,
        seed,
    })
}

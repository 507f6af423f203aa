//! Multistart Nelder–Mead maximization of `I_PH` over local settings.
//!
//! Restart `k` draws its starting point from a ChaCha20 stream `k` keyed by
//! the configured seed, so the first `n` restarts are the same for any
//! budget `≥ n` and results are bit-reproducible regardless of thread
//! scheduling.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::BipartiteDims;
use crate::states::DensityMatrix;
use crate::unitaries::LocalUnitaryPair;
use crate::witness::{Label, WitnessEvaluator, WitnessReport};

const TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterSpace {
    /// 3 + 3 Euler angles.
    Su2Su2,
    /// 3 Euler angles + 8 Gell-Mann coefficients.
    Su2Su3,
}

impl ParameterSpace {
    pub fn for_dims(dims: BipartiteDims) -> Self {
        if dims.is_qubit_qubit() {
            ParameterSpace::Su2Su2
        } else {
            ParameterSpace::Su2Su3
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            ParameterSpace::Su2Su2 => 6,
            ParameterSpace::Su2Su3 => 11,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Independent Nelder–Mead runs (default 32).
    pub restarts: usize,
    /// Iteration cap per run (default 2000).
    pub max_iters: usize,
    /// Stop when the simplex values span at most this much (default 1e-9).
    pub value_tol: f64,
    /// Edge length of the initial simplex in radians (default 0.3).
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iters: 2000,
            value_tol: 1e-9,
            initial_step: 0.3,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if self.value_tol.is_nan() || self.value_tol < 0.0 || self.initial_step.is_nan() || self.initial_step <= 0.0 {
            return Err(Error::InvalidParameter(
                "value_tol must be ≥ 0 and initial_step > 0".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge
/// `step`. Stops when `max f − min f` over the simplex is `≤ tol` or after
/// `max_iters` iterations.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    max_iters: usize,
    tol: f64,
) -> NelderMeadResult {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    let mut iterations = 0;
    while iterations < max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= tol {
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].0.clone();
        let f_best = simplex[0].1;
        let f_second = simplex[n - 1].1;
        let f_worst = simplex[n].1;

        let xr = lerp(&centroid, &worst, -REFLECT);
        let fr = eval(&xr);
        if fr < f_best {
            let xe = lerp(&centroid, &worst, -EXPAND);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = lerp(&centroid, &xr, CONTRACT);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = lerp(&centroid, &worst, CONTRACT);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(f_worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x = lerp(&best, &entry.0, SHRINK);
            let v = eval(&x);
            *entry = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult {
        x,
        value,
        iterations,
        evaluations,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub best_value: f64,
    pub best_params: Vec<f64>,
    pub best_restart: usize,
    pub per_restart_values: Vec<f64>,
    pub evaluations: usize,
}

impl OptimizationResult {
    pub fn best_settings(&self, dims: BipartiteDims) -> LocalUnitaryPair {
        LocalUnitaryPair::from_vector(dims, &self.best_params).expect("vector built for dims")
    }
}

/// Starting settings of restart `k`.
pub fn restart_start(dims: BipartiteDims, seed: u64, k: usize) -> LocalUnitaryPair {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    LocalUnitaryPair::sample(dims, &mut rng)
}

/// Multistart search for `max_{U,V} I_PH(ρ, U, V)`. The returned value is a
/// lower bound on the supremum.
pub fn maximize_i_ph(rho: &DensityMatrix, cfg: &OptimizerConfig) -> OptimizationResult {
    let dims = rho.dims();
    let evaluator = WitnessEvaluator::new(rho);
    let runs: Vec<NelderMeadResult> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|k| {
            let x0 = restart_start(dims, cfg.seed, k).to_vector();
            nelder_mead(
                |x| -evaluator.i_ph_at(x),
                &x0,
                cfg.initial_step,
                cfg.max_iters,
                cfg.value_tol,
            )
        })
        .collect();

    let mut best = 0;
    for (k, r) in runs.iter().enumerate() {
        if -r.value > -runs[best].value + TIE_TOL {
            best = k;
        }
    }
    OptimizationResult {
        best_value: -runs[best].value,
        best_params: runs[best].x.clone(),
        best_restart: best,
        per_restart_values: runs.iter().map(|r| -r.value).collect(),
        evaluations: runs.iter().map(|r| r.evaluations).sum(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub label: Label,
    pub report: WitnessReport,
    pub optimization: OptimizationResult,
}

/// Maximizes the witness and labels the state: entangled above
/// [`crate::witness::ENTANGLEMENT_THRESHOLD`], separable below its
/// negative, boundary otherwise.
pub fn classify(rho: &DensityMatrix, cfg: &OptimizerConfig) -> Classification {
    let optimization = maximize_i_ph(rho, cfg);
    let settings = optimization.best_settings(rho.dims());
    let y = WitnessEvaluator::new(rho).y(&settings);
    let label = Label::from_i_ph_max(optimization.best_value);
    let report = WitnessReport::assemble(rho, &settings, y, cfg.restarts.max(1), Some(cfg.seed), Some(label));
    Classification {
        label,
        report,
        optimization,
    }
}

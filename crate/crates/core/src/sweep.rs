//! Parameter sweeps over the Werner and MEMS families, and PPT-agreement
//! audits on random ensembles.
//!
//! Grid points and audit states are evaluated in parallel; output rows keep
//! grid / state order.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::BipartiteDims;
use crate::optimize::{maximize_i_ph, OptimizerConfig};
use crate::states::{self, mems, random_separable, random_state, werner, MemsParams, WernerParams};
use crate::witness::{self, ENTANGLEMENT_THRESHOLD};

/// Numeric maxima exceeding the closed form by more than this are flagged.
pub const FORMULA_EXCESS_TOL: f64 = 1e-3;
/// Audit states with `|ppt_min_eig|` below this are excluded from agreement
/// counts.
pub const PPT_BAND: f64 = 1e-3;

/// Evenly spaced values from `start` to `end` inclusive. A degenerate axis
/// (`start == end`) is a single point; a swept axis needs `steps ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::InvalidParameter("grid bounds must be finite".into()));
        }
        if start != end && steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "a swept axis needs at least 2 steps, got {steps}"
            )));
        }
        Ok(Self { start, end, steps })
    }

    pub fn point(value: f64) -> Self {
        Self { start: value, end: value, steps: 1 }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.start == self.end || self.steps < 2 {
            return vec![self.start];
        }
        let n = self.steps - 1;
        (0..=n)
            .map(|k| {
                if k == n {
                    self.end
                } else {
                    self.start + (self.end - self.start) * k as f64 / n as f64
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaGrid {
    Axis(GridAxis),
    /// `α = 1/(1 + 2|sin 2θ|)` for each θ.
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum SweepSpec {
    Werner { theta: GridAxis, alpha: AlphaGrid },
    Mems { gamma: GridAxis },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub i_ph_max_numeric: f64,
    pub i_ph_formula: f64,
    pub abs_diff: f64,
    pub ppt_min_eig: f64,
    pub chsh_max: f64,
    pub concurrence: f64,
    pub p_e: f64,
}

impl SweepRow {
    /// Numeric maximum above the closed form by more than
    /// [`FORMULA_EXCESS_TOL`].
    pub fn exceeds_formula(&self) -> bool {
        self.i_ph_max_numeric - self.i_ph_formula > FORMULA_EXCESS_TOL
    }
}

#[derive(Clone, Copy, Debug)]
enum GridPoint {
    Werner(WernerParams),
    Mems(MemsParams),
}

impl SweepSpec {
    fn points(&self) -> Result<Vec<GridPoint>> {
        Ok(match self {
            SweepSpec::Werner { theta, alpha } => {
                let mut pts = Vec::new();
                for t in theta.values() {
                    let alphas = match alpha {
                        AlphaGrid::Axis(a) => a.values(),
                        AlphaGrid::Boundary => vec![WernerParams::boundary_alpha(t)],
                    };
                    for a in alphas {
                        pts.push(GridPoint::Werner(WernerParams::new(t, a)?));
                    }
                }
                pts
            }
            SweepSpec::Mems { gamma } => gamma
                .values()
                .into_iter()
                .map(|g| MemsParams::new(g).map(GridPoint::Mems))
                .collect::<Result<_>>()?,
        })
    }
}

fn evaluate_point(point: GridPoint, cfg: &OptimizerConfig) -> Result<SweepRow> {
    let (rho, formula, theta, alpha, gamma) = match point {
        GridPoint::Werner(p) => (werner(p)?, p.i_ph_max_formula(), Some(p.theta), Some(p.alpha), None),
        GridPoint::Mems(p) => (mems(p)?, p.i_ph_max_formula(), None, None, Some(p.gamma)),
    };
    let numeric = maximize_i_ph(&rho, cfg).best_value;
    Ok(SweepRow {
        theta,
        alpha,
        gamma,
        i_ph_max_numeric: numeric,
        i_ph_formula: formula,
        abs_diff: (numeric - formula).abs(),
        ppt_min_eig: states::ppt_min_eigenvalue(&rho),
        chsh_max: witness::chsh_max(&rho)?,
        concurrence: states::concurrence(&rho)?,
        p_e: witness::degree_of_entanglement(numeric),
    })
}

pub fn run_sweep(spec: &SweepSpec, cfg: &OptimizerConfig) -> Result<Vec<SweepRow>> {
    let points = spec.points()?;
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty sweep grid".into()));
    }
    points.into_par_iter().map(|p| evaluate_point(p, cfg)).collect()
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Writes sweep rows as CSV (header row, 12 significant digits). Werner
/// sweeps lead with `theta,alpha`, MEMS sweeps with `gamma`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mems_family = rows.first().is_some_and(|r| r.gamma.is_some());
    let mut wtr = csv::Writer::from_writer(out);
    let tail = [
        "i_ph_max_numeric",
        "i_ph_formula",
        "abs_diff",
        "ppt_min_eig",
        "chsh_max",
        "concurrence",
        "p_e",
    ];
    let mut header: Vec<&str> = if mems_family { vec!["gamma"] } else { vec!["theta", "alpha"] };
    header.extend(tail);
    wtr.write_record(&header).map_err(csv_io)?;
    for r in rows {
        let mut rec: Vec<String> = if mems_family {
            vec![sig12(r.gamma.unwrap_or(f64::NAN))]
        } else {
            vec![sig12(r.theta.unwrap_or(f64::NAN)), sig12(r.alpha.unwrap_or(f64::NAN))]
        };
        rec.extend(
            [
                r.i_ph_max_numeric,
                r.i_ph_formula,
                r.abs_diff,
                r.ppt_min_eig,
                r.chsh_max,
                r.concurrence,
                r.p_e,
            ]
            .map(sig12),
        );
        wtr.write_record(&rec).map_err(csv_io)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Ensemble {
    /// Hilbert–Schmidt random states.
    Random,
    /// Separable mixtures; state `k` has `1 + k % max_terms` product terms.
    Separable { max_terms: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub index: usize,
    pub state_seed: u64,
    pub ppt_min_eig: f64,
    pub i_ph_max: f64,
    pub in_band: bool,
    /// `i_ph_max > 0` exactly when `ppt_min_eig < 0`.
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub n: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub boundary_excluded: usize,
    /// States with `i_ph_max > ENTANGLEMENT_THRESHOLD` and `ppt_min_eig ≥ 0`.
    pub false_positives: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub dims: BipartiteDims,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub records: Vec<AuditRecord>,
    pub summary: AuditSummary,
}

/// Compares the sign of the numeric witness maximum with the PT minimum
/// eigenvalue on `n_states` states; state `k` is drawn with seed `seed + k`.
pub fn run_audit(
    dims: BipartiteDims,
    ensemble: Ensemble,
    n_states: usize,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<AuditReport> {
    if let Ensemble::Separable { max_terms: 0 } = ensemble {
        return Err(Error::InvalidParameter("max_terms must be at least 1".into()));
    }
    let records: Vec<AuditRecord> = (0..n_states)
        .into_par_iter()
        .map(|k| -> Result<AuditRecord> {
            let state_seed = seed.wrapping_add(k as u64);
            let rho = match ensemble {
                Ensemble::Random => random_state(dims, state_seed),
                Ensemble::Separable { max_terms } => {
                    random_separable(dims, 1 + k % max_terms, state_seed)?
                }
            };
            let ppt = states::ppt_min_eigenvalue(&rho);
            let value = maximize_i_ph(&rho, cfg).best_value;
            Ok(AuditRecord {
                index: k,
                state_seed,
                ppt_min_eig: ppt,
                i_ph_max: value,
                in_band: ppt.abs() < PPT_BAND,
                agree: (value > 0.0) == (ppt < 0.0),
            })
        })
        .collect::<Result<_>>()?;

    let counted = records.iter().filter(|r| !r.in_band);
    let agreements = counted.clone().filter(|r| r.agree).count();
    let disagreements = counted.count() - agreements;
    let summary = AuditSummary {
        n: records.len(),
        agreements,
        disagreements,
        boundary_excluded: records.iter().filter(|r| r.in_band).count(),
        false_positives: records
            .iter()
            .filter(|r| r.ppt_min_eig >= 0.0 && r.i_ph_max > ENTANGLEMENT_THRESHOLD)
            .count(),
    };
    Ok(AuditReport {
        dims,
        ensemble,
        seed,
        records,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn axis_values() {
        let a = GridAxis::new(0.0, 1.0, 11).unwrap();
        let v = a.values();
        assert_eq!(v.len(), 11);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[10], 1.0);
        assert!((v[3] - 0.3).abs() < 1e-15);
        assert_eq!(GridAxis::point(0.5).values(), vec![0.5]);
        assert!(GridAxis::new(0.0, 1.0, 1).is_err());
        assert!(GridAxis::new(0.0, f64::NAN, 3).is_err());
    }

    #[test]
    fn werner_line_sweep_matches_formula() {
        let spec = SweepSpec::Werner {
            theta: GridAxis::point(FRAC_PI_4),
            alpha: AlphaGrid::Axis(GridAxis::new(0.0, 1.0, 6).unwrap()),
        };
        let rows = run_sweep(&spec, &OptimizerConfig::default()).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.abs_diff <= 1e-3, "{r:?}");
            assert!((r.p_e - (r.i_ph_max_numeric / 4.0).max(0.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_rows_are_near_zero() {
        let spec = SweepSpec::Werner {
            theta: GridAxis::new(0.1, PI - 0.1, 5).unwrap(),
            alpha: AlphaGrid::Boundary,
        };
        for r in run_sweep(&spec, &OptimizerConfig::default()).unwrap() {
            assert!(r.i_ph_max_numeric.abs() <= 2e-3, "{r:?}");
            assert!(r.ppt_min_eig.abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_is_not_the_supremum_off_the_diagonal() {
        // θ = 0 is diagonal; flipping qubit A gives I = −(1−α)², above the
        // closed form α² − 1 by 2α(1−α)
        let flip = crate::unitaries::su2(crate::unitaries::Su2Params::new(0.0, PI, 0.0));
        let id = crate::linalg::ComplexMatrix::identity(2);
        for alpha in [0.125, 0.5, 0.875] {
            let p = WernerParams::new(0.0, alpha).unwrap();
            let value = witness::i_ph(&werner(p).unwrap(), &flip, &id).unwrap();
            assert!((value + (1.0 - alpha).powi(2)).abs() < 1e-12);
            assert!((value - p.i_ph_max_formula() - 2.0 * alpha * (1.0 - alpha)).abs() < 1e-12);
        }
        let spec = SweepSpec::Werner {
            theta: GridAxis::point(0.0),
            alpha: AlphaGrid::Axis(GridAxis::point(0.5)),
        };
        let row = &run_sweep(&spec, &OptimizerConfig::default()).unwrap()[0];
        assert!(row.exceeds_formula());
        assert!(row.i_ph_max_numeric >= -0.25 - 1e-9);
    }

    #[test]
    fn mems_sweep_csv_layout() {
        let spec = SweepSpec::Mems { gamma: GridAxis::new(0.0, 1.0, 6).unwrap() };
        let rows = run_sweep(&spec, &OptimizerConfig::default()).unwrap();
        for r in &rows {
            assert!(r.abs_diff <= 1e-3, "{r:?}");
        }
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "gamma,i_ph_max_numeric,i_ph_formula,abs_diff,ppt_min_eig,chsh_max,concurrence,p_e"
        );
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 8);
        assert_eq!(first[0], "0.00000000000e0");
    }

    #[test]
    fn small_audits() {
        let cfg = OptimizerConfig::default().with_restarts(16);
        let r = run_audit(BipartiteDims::QUBIT_QUBIT, Ensemble::Random, 24, 100, &cfg).unwrap();
        assert_eq!(r.summary.n, 24);
        assert_eq!(r.summary.disagreements, 0, "{:?}", r.records.iter().filter(|x| !x.agree).collect::<Vec<_>>());
        assert_eq!(r.summary.agreements + r.summary.boundary_excluded, 24);
        let s = run_audit(BipartiteDims::QUBIT_QUTRIT, Ensemble::Separable { max_terms: 6 }, 12, 5, &cfg).unwrap();
        assert_eq!(s.summary.false_positives, 0);
        assert!(run_audit(BipartiteDims::QUBIT_QUBIT, Ensemble::Separable { max_terms: 0 }, 1, 0, &cfg).is_err());
    }
}

//! The quadratic PPT-equivalent witness.
//!
//! For local settings `(U, V)` the three numbers
//! `Y_k = tr[ρ (U⊗V) Ŷ_k (U⊗V)†]` are linear combinations of the joint
//! probabilities of the rotated local POVMs, and
//! `I_PH = Y₁² + Y₂² − Y₃²` is non-positive for every setting exactly when
//! `ρ^{T_B} ≥ 0`.
//!
//! The operators come from the Schmidt-form projector
//! `|Φ⟩⟨Φ| = (sin 2ξ X̂₁ − cos 2ξ X̂₂ + X̂₃)/4` with `Ŷ_k = X̂_k^{T_B}`.
//! Substituting `t = tan ξ` into `tr[ρ' (|Φ⟩⟨Φ|)^{T_B}] ≥ 0` gives the
//! quadratic `a t² + b t + c ≥ 0` with `a = Y₂+Y₃`, `b = 2Y₁`, `c = Y₃−Y₂`;
//! it holds for all real `t` iff `a ≥ 0` and `b² − 4ac ≤ 0`, and
//! `b² − 4ac = 4 I_PH`.
//!
//! Two evaluation routes are provided and cross-checked in tests: the
//! probability route (joint probabilities → fixed linear combinations) and
//! the operator route (traces against conjugated `Ŷ_k`).

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron, BipartiteDims, ComplexMatrix};
use crate::povm::{self, PovmSet};
use crate::states::{self, DensityMatrix};
use crate::unitaries::{GroupParams, LocalUnitaryPair, Su2Params};

/// `i_ph_max` above this value is reported as entangled, below its negative
/// as separable, and in between as boundary.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-6;

const PROB_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-10;

/// Joint outcome probabilities `P_ij` of the rotated local POVMs, row index
/// on subsystem A.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointProbabilityTable {
    n_a: usize,
    n_b: usize,
    p: Vec<f64>,
}

impl JointProbabilityTable {
    pub fn new(n_a: usize, n_b: usize, p: Vec<f64>) -> Result<Self> {
        if p.len() != n_a * n_b || n_a == 0 || n_b == 0 {
            return Err(Error::DimensionMismatch(format!(
                "table {n_a}x{n_b} needs {} entries, got {}",
                n_a * n_b,
                p.len()
            )));
        }
        if let Some(bad) = p.iter().find(|&&x| !(-PROB_TOL..=1.0 + PROB_TOL).contains(&x)) {
            return Err(Error::InvalidParameter(format!("probability {bad} outside [0, 1]")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}")));
        }
        Ok(Self { n_a, n_b, p })
    }

    /// Empirical frequencies from outcome counts.
    pub fn from_counts(n_a: usize, n_b: usize, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::InvalidParameter("no counts".into()));
        }
        let p = counts.iter().map(|&k| k as f64 / total as f64).collect();
        Self::new(n_a, n_b, p)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_a, self.n_b)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n_b + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// `P_i^A = Σ_j P_ij`
    pub fn marginal_a(&self) -> Vec<f64> {
        (0..self.n_a).map(|i| (0..self.n_b).map(|j| self.get(i, j)).sum()).collect()
    }

    /// `P_j^B = Σ_i P_ij`
    pub fn marginal_b(&self) -> Vec<f64> {
        (0..self.n_b).map(|j| (0..self.n_a).map(|i| self.get(i, j)).sum()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YTriple {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

impl YTriple {
    /// `Y₁² + Y₂² − Y₃²`
    pub fn i_ph(&self) -> f64 {
        self.y1 * self.y1 + self.y2 * self.y2 - self.y3 * self.y3
    }

    pub fn quadratic_coeffs(&self) -> QuadraticCoeffs {
        QuadraticCoeffs {
            a: self.y2 + self.y3,
            b: 2.0 * self.y1,
            c: self.y3 - self.y2,
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.y1, self.y2, self.y3]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.y1 - other.y1)
            .abs()
            .max((self.y2 - other.y2).abs())
            .max((self.y3 - other.y3).abs())
    }
}

/// `a t² + b t + c` with `a = Y₂+Y₃`, `b = 2Y₁`, `c = Y₃−Y₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticCoeffs {
    pub fn discriminant(&self) -> f64 {
        self.b * self.b - 4.0 * self.a * self.c
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.a * t + self.b) * t + self.c
    }

    /// Non-negative for every real `t`: `a ≥ 0` and `b² − 4ac ≤ 0` (the
    /// degenerate `a = 0` case additionally needs `b = 0`, `c ≥ 0`).
    pub fn nonnegative_for_all_t(&self, tol: f64) -> bool {
        if self.a.abs() <= tol {
            return self.b.abs() <= tol && self.c >= -tol;
        }
        self.a > 0.0 && self.discriminant() <= tol
    }
}

/// `X̂₁, X̂₂, X̂₃` and their partial transposes `Ŷ₁, Ŷ₂, Ŷ₃`.
#[derive(Clone, Debug)]
pub struct WitnessOperators {
    pub dims: BipartiteDims,
    pub x: [ComplexMatrix; 3],
    pub y: [ComplexMatrix; 3],
}

// Sign patterns over the 4×4 tetrahedron outcome pairs (0-based i, j).
const X1_PLUS: [(usize, usize); 4] = [(0, 1), (1, 0), (2, 3), (3, 2)];
const X1_MINUS: [(usize, usize); 4] = [(0, 2), (2, 0), (1, 3), (3, 1)];
const Y1_PLUS: [(usize, usize); 4] = [(0, 0), (1, 1), (2, 2), (3, 3)];
const Y1_MINUS: [(usize, usize); 4] = [(0, 3), (3, 0), (1, 2), (2, 1)];
const X3_PLUS: [(usize, usize); 8] = [
    (0, 0), (1, 1), (2, 2), (3, 3),
    (0, 3), (3, 0), (1, 2), (2, 1),
];
const X3_MINUS: [(usize, usize); 8] = [
    (0, 1), (1, 0), (0, 2), (2, 0),
    (1, 3), (3, 1), (2, 3), (3, 2),
];
/// `F₁ + F₄ − F₂ − F₃` weights.
const Z_WEIGHTS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

fn signed_product_sum(
    fa: &PovmSet,
    fb: &PovmSet,
    plus: &[(usize, usize)],
    minus: &[(usize, usize)],
) -> ComplexMatrix {
    let n = fa.dim() * fb.dim();
    let mut acc = ComplexMatrix::zeros(n, n);
    for &(i, j) in plus {
        acc = &acc + &kron(fa.element(i), fb.element(j));
    }
    for &(i, j) in minus {
        acc = &acc - &kron(fa.element(i), fb.element(j));
    }
    acc
}

impl WitnessOperators {
    /// Qubit ⊗ qubit operators assembled from the tetrahedron POVM
    /// products.
    fn qubit_qubit() -> Self {
        let dims = BipartiteDims::QUBIT_QUBIT;
        let f = povm::qubit_tetrahedron();
        let id2 = ComplexMatrix::identity(2);
        let id4 = ComplexMatrix::identity(4);
        let r3 = 3f64.sqrt();

        let x1 = signed_product_sum(&f, &f, &X1_PLUS, &X1_MINUS).scale_re(6.0);
        let z = f
            .elements()
            .iter()
            .zip(Z_WEIGHTS)
            .fold(ComplexMatrix::zeros(2, 2), |acc, (e, w)| &acc + &e.scale_re(w))
            .scale_re(r3);
        let x2 = &kron(&z, &id2) + &kron(&id2, &z);
        let x3 = &id4 + &signed_product_sum(&f, &f, &X3_PLUS, &X3_MINUS).scale_re(3.0);
        Self::with_partial_transposes(dims, [x1, x2, x3])
    }

    /// Operators supported on the two-dimensional Schmidt support
    /// `span{|00⟩, |11⟩}`; valid for both 2×2 and 2×3.
    fn from_schmidt_support(dims: BipartiteDims) -> Self {
        let n = dims.total();
        let i00 = 0;
        let i11 = dims.dim_b() + 1;
        let mut x1 = ComplexMatrix::zeros(n, n);
        x1[(i00, i11)] = linalg::c(2.0, 0.0);
        x1[(i11, i00)] = linalg::c(2.0, 0.0);
        let mut x2 = ComplexMatrix::zeros(n, n);
        x2[(i00, i00)] = linalg::c(2.0, 0.0);
        x2[(i11, i11)] = linalg::c(-2.0, 0.0);
        let mut x3 = ComplexMatrix::zeros(n, n);
        x3[(i00, i00)] = linalg::c(2.0, 0.0);
        x3[(i11, i11)] = linalg::c(2.0, 0.0);
        Self::with_partial_transposes(dims, [x1, x2, x3])
    }

    fn with_partial_transposes(dims: BipartiteDims, x: [ComplexMatrix; 3]) -> Self {
        let y = x
            .clone()
            .map(|m| linalg::partial_transpose(&m, dims).expect("operator sized for dims"));
        Self { dims, x, y }
    }

    /// `(sin 2ξ X̂₁ − cos 2ξ X̂₂ + X̂₃)/4`
    pub fn schmidt_projector(&self, xi: f64) -> ComplexMatrix {
        let (s, c) = (2.0 * xi).sin_cos();
        let m = &(&self.x[0].scale_re(s) - &self.x[1].scale_re(c)) + &self.x[2];
        m.scale_re(0.25)
    }

    /// `(sin 2ξ Ŷ₁ − cos 2ξ Ŷ₂ + Ŷ₃)/4 = (|Φ⟩⟨Φ|)^{T_B}`
    pub fn transposed_schmidt_projector(&self, xi: f64) -> ComplexMatrix {
        let (s, c) = (2.0 * xi).sin_cos();
        let m = &(&self.y[0].scale_re(s) - &self.y[1].scale_re(c)) + &self.y[2];
        m.scale_re(0.25)
    }
}

/// Cached witness operators for the given dimensions.
pub fn y_operators(dims: BipartiteDims) -> &'static WitnessOperators {
    static QQ: OnceLock<WitnessOperators> = OnceLock::new();
    static QT: OnceLock<WitnessOperators> = OnceLock::new();
    if dims.is_qubit_qubit() {
        QQ.get_or_init(WitnessOperators::qubit_qubit)
    } else {
        QT.get_or_init(|| WitnessOperators::from_schmidt_support(BipartiteDims::QUBIT_QUTRIT))
    }
}

/// Local POVM pair for the given dimensions.
pub fn local_povms(dims: BipartiteDims) -> (PovmSet, PovmSet) {
    let b = if dims.is_qubit_qubit() {
        povm::qubit_tetrahedron()
    } else {
        povm::qutrit_simplex()
    };
    (povm::qubit_tetrahedron(), b)
}

/// Coefficients `c_ij` with `O = Σ c_ij Fᵢ^A ⊗ Fⱼ^B`, computed from the dual
/// frames as `c_ij = tr[(Gᵢ^A ⊗ Gⱼ^B) O]`. Row-major over `(i, j)`.
pub fn expand_in_product_povm(op: &ComplexMatrix, dims: BipartiteDims) -> Result<Vec<f64>> {
    let (fa, fb) = local_povms(dims);
    let ga = fa.dual_frame()?;
    let gb = fb.dual_frame()?;
    let mut out = Vec::with_capacity(fa.len() * fb.len());
    for a in ga.duals() {
        for b in gb.duals() {
            out.push(kron(a, b).trace_of_product(op).re);
        }
    }
    Ok(out)
}

/// Probability-level coefficients of `Y₁, Y₂, Y₃` for 2×3, from the dual
/// frame expansion of `Ŷ_k` over the 36 product POVM elements.
pub fn qutrit_probability_coefficients() -> &'static [Vec<f64>; 3] {
    static COEFFS: OnceLock<[Vec<f64>; 3]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let ops = y_operators(BipartiteDims::QUBIT_QUTRIT);
        std::array::from_fn(|k| {
            expand_in_product_povm(&ops.y[k], BipartiteDims::QUBIT_QUTRIT)
                .expect("tetrahedron and simplex POVMs are informationally complete")
        })
    })
}

fn check_settings(rho: &DensityMatrix, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<()> {
    let dims = rho.dims();
    if u.rows() != dims.dim_a() || u.cols() != dims.dim_a() {
        return Err(Error::DimensionMismatch(format!("U must be {0}x{0}", dims.dim_a())));
    }
    if v.rows() != dims.dim_b() || v.cols() != dims.dim_b() {
        return Err(Error::DimensionMismatch(format!("V must be {0}x{0}", dims.dim_b())));
    }
    u.ensure_unitary(linalg::HERMITIAN_TOL)?;
    v.ensure_unitary(linalg::HERMITIAN_TOL)
}

/// `P_ij = tr[ρ (U Fᵢ U†) ⊗ (V Fⱼ V†)]`
pub fn joint_probabilities(
    rho: &DensityMatrix,
    u: &ComplexMatrix,
    v: &ComplexMatrix,
) -> Result<JointProbabilityTable> {
    check_settings(rho, u, v)?;
    let (fa, fb) = local_povms(rho.dims());
    let fa = fa.rotate(u)?;
    let fb = fb.rotate(v)?;
    let mut p = Vec::with_capacity(fa.len() * fb.len());
    for a in fa.elements() {
        for b in fb.elements() {
            p.push(rho.matrix().trace_of_product(&kron(a, b)).re);
        }
    }
    JointProbabilityTable::new(fa.len(), fb.len(), p)
}

/// Y-triple from joint probabilities.
///
/// For 4×4 tables this uses the closed forms
/// `Y₁ = 6(P₁₁+P₂₂+P₃₃+P₄₄ − P₁₄−P₄₁−P₂₃−P₃₂)`,
/// `Y₂ = √3(P₁^A+P₄^A−P₂^A−P₃^A + P₁^B+P₄^B−P₂^B−P₃^B)`,
/// `Y₃ = 1 + 3(P₁₁+…+P₄₄ + P₁₄+P₄₁+P₂₃+P₃₂ − P₁₂−P₂₁−P₁₃−P₃₁−P₂₄−P₄₂−P₃₄−P₄₃)`.
/// For 4×9 tables it uses the dual-frame coefficients.
pub fn y_from_probabilities(table: &JointProbabilityTable) -> Result<YTriple> {
    match table.shape() {
        (4, 4) => {
            let signed = |plus: &[(usize, usize)], minus: &[(usize, usize)]| {
                plus.iter().map(|&(i, j)| table.get(i, j)).sum::<f64>()
                    - minus.iter().map(|&(i, j)| table.get(i, j)).sum::<f64>()
            };
            let pa = table.marginal_a();
            let pb = table.marginal_b();
            let z: f64 = (0..4).map(|k| Z_WEIGHTS[k] * (pa[k] + pb[k])).sum();
            Ok(YTriple {
                y1: 6.0 * signed(&Y1_PLUS, &Y1_MINUS),
                y2: 3f64.sqrt() * z,
                y3: 1.0 + 3.0 * signed(&X3_PLUS, &X3_MINUS),
            })
        }
        (4, 9) => {
            let coeffs = qutrit_probability_coefficients();
            let dot = |c: &[f64]| c.iter().zip(table.as_slice()).map(|(a, b)| a * b).sum::<f64>();
            Ok(YTriple {
                y1: dot(&coeffs[0]),
                y2: dot(&coeffs[1]),
                y3: dot(&coeffs[2]),
            })
        }
        (a, b) => Err(Error::DimensionMismatch(format!(
            "no Y expressions for a {a}x{b} probability table"
        ))),
    }
}

/// `W† ρ W` with `W = U ⊗ V`.
fn rotated_state(rho: &ComplexMatrix, u: &ComplexMatrix, v: &ComplexMatrix) -> ComplexMatrix {
    let w = kron(u, v);
    &(&w.adjoint() * rho) * &w
}

fn traces(rho_rot: &ComplexMatrix, ops: &[ComplexMatrix; 3]) -> YTriple {
    YTriple {
        y1: rho_rot.trace_of_product(&ops[0]).re,
        y2: rho_rot.trace_of_product(&ops[1]).re,
        y3: rho_rot.trace_of_product(&ops[2]).re,
    }
}

/// `Y_k = tr[ρ (U⊗V) Ŷ_k (U⊗V)†]`
pub fn y_operator_path(rho: &DensityMatrix, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<YTriple> {
    check_settings(rho, u, v)?;
    let ops = y_operators(rho.dims());
    Ok(traces(&rotated_state(rho.matrix(), u, v), &ops.y))
}

/// `X_k = tr[ρ (U⊗V) X̂_k (U⊗V)†]`
pub fn x_operator_path(rho: &DensityMatrix, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<YTriple> {
    check_settings(rho, u, v)?;
    let ops = y_operators(rho.dims());
    Ok(traces(&rotated_state(rho.matrix(), u, v), &ops.x))
}

pub fn i_ph(rho: &DensityMatrix, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<f64> {
    y_operator_path(rho, u, v).map(|y| y.i_ph())
}

pub fn quadratic_coeffs(rho: &DensityMatrix, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<QuadraticCoeffs> {
    y_operator_path(rho, u, v).map(|y| y.quadratic_coeffs())
}

/// Fast evaluation of the Y-triple for many settings of one state; the
/// optimizer's objective.
#[derive(Clone, Debug)]
pub struct WitnessEvaluator<'a> {
    rho: &'a DensityMatrix,
    ops: &'static WitnessOperators,
}

impl<'a> WitnessEvaluator<'a> {
    pub fn new(rho: &'a DensityMatrix) -> Self {
        Self {
            rho,
            ops: y_operators(rho.dims()),
        }
    }

    pub fn y(&self, settings: &LocalUnitaryPair) -> YTriple {
        let (u, v) = settings.matrices();
        traces(&rotated_state(self.rho.matrix(), &u, &v), &self.ops.y)
    }

    /// `I_PH` at the flat settings vector (see [`LocalUnitaryPair::from_vector`]).
    pub fn i_ph_at(&self, x: &[f64]) -> f64 {
        let settings = LocalUnitaryPair::from_vector(self.rho.dims(), x)
            .expect("optimizer vector length matches dims");
        self.y(&settings).i_ph()
    }
}

/// Maximal CHSH value over all projective settings, `2·√(m₁ + m₂)` with
/// `m₁ ≥ m₂` the top eigenvalues of `TᵀT`, `T_kl = tr[ρ σ_k ⊗ σ_l]`.
pub fn chsh_max(rho: &DensityMatrix) -> Result<f64> {
    if !rho.dims().is_qubit_qubit() {
        return Err(Error::Unsupported("CHSH baseline is defined for two qubits only".into()));
    }
    let t = correlation_matrix(rho);
    let ttt = ComplexMatrix::from_fn(3, 3, |i, j| {
        linalg::c((0..3).map(|k| t[k][i] * t[k][j]).sum(), 0.0)
    });
    let m = linalg::hermitian_eigenvalues(&ttt)?;
    Ok(2.0 * (m[1] + m[2]).max(0.0).sqrt())
}

/// `T_kl = tr[ρ σ_k ⊗ σ_l]`
pub fn correlation_matrix(rho: &DensityMatrix) -> [[f64; 3]; 3] {
    let s = linalg::pauli();
    std::array::from_fn(|k| {
        std::array::from_fn(|l| rho.matrix().trace_of_product(&kron(&s[k], &s[l])).re)
    })
}

/// CHSH expression `⟨A₁B₁⟩ + ⟨A₁B₂⟩ + ⟨A₂B₁⟩ − ⟨A₂B₂⟩` for unit measurement
/// directions.
pub fn chsh_value(rho: &DensityMatrix, a: [[f64; 3]; 2], b: [[f64; 3]; 2]) -> f64 {
    let t = correlation_matrix(rho);
    let corr = |x: &[f64; 3], y: &[f64; 3]| {
        (0..3)
            .flat_map(|k| (0..3).map(move |l| (k, l)))
            .map(|(k, l)| x[k] * t[k][l] * y[l])
            .sum::<f64>()
    };
    corr(&a[0], &b[0]) + corr(&a[0], &b[1]) + corr(&a[1], &b[0]) - corr(&a[1], &b[1])
}

/// `P_E = max{0, I_PH^max / 4}`
pub fn degree_of_entanglement(i_ph_max: f64) -> f64 {
    (i_ph_max / 4.0).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entangled,
    Separable,
    Boundary,
}

impl Label {
    pub fn from_i_ph_max(value: f64) -> Self {
        if value > ENTANGLEMENT_THRESHOLD {
            Label::Entangled
        } else if value < -ENTANGLEMENT_THRESHOLD {
            Label::Separable
        } else {
            Label::Boundary
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub i_ph_max: f64,
    pub y: [f64; 3],
    pub u_params: Su2Params,
    pub v_params: GroupParams,
    pub u_matrix: ComplexMatrix,
    pub v_matrix: ComplexMatrix,
    pub ppt_min_eig: f64,
    pub chsh_max: Option<f64>,
    pub concurrence: Option<f64>,
    pub p_e: f64,
    pub restarts_used: usize,
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub label: Option<Label>,
}

impl WitnessReport {
    /// Report for fixed settings; `i_ph_max` holds the single-point value.
    pub fn at_settings(rho: &DensityMatrix, settings: &LocalUnitaryPair) -> Result<Self> {
        let (u, v) = settings.matrices();
        let y = y_operator_path(rho, &u, &v)?;
        Ok(Self::assemble(rho, settings, y, 0, None, None))
    }

    pub(crate) fn assemble(
        rho: &DensityMatrix,
        settings: &LocalUnitaryPair,
        y: YTriple,
        restarts_used: usize,
        seed: Option<u64>,
        label: Option<Label>,
    ) -> Self {
        let (u, v) = settings.matrices();
        let value = y.i_ph();
        let two_qubit = rho.dims().is_qubit_qubit();
        Self {
            i_ph_max: value,
            y: y.to_array(),
            u_params: settings.u,
            v_params: settings.v,
            u_matrix: u,
            v_matrix: v,
            ppt_min_eig: states::ppt_min_eigenvalue(rho),
            chsh_max: two_qubit.then(|| chsh_max(rho).expect("two-qubit state")),
            concurrence: two_qubit.then(|| states::concurrence(rho).expect("two-qubit state")),
            p_e: degree_of_entanglement(value),
            restarts_used,
            seed,
            label,
        }
    }
}

//! Density matrices, the Werner and MEMS families, random audit ensembles,
//! and the two ground-truth diagnostics (PT minimum eigenvalue, concurrence).

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, kron, BipartiteDims, ComplexMatrix};

/// Minimum eigenvalue accepted as "positive semidefinite".
pub const PSD_TOL: f64 = -1e-10;
const TRACE_TOL: f64 = 1e-10;

/// A validated bipartite density matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    dims: BipartiteDims,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all within 1e-10).
    pub fn new(dims: BipartiteDims, matrix: ComplexMatrix) -> Result<Self> {
        let n = dims.total();
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "state for dims {dims} must be {n}x{n}, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let herm = matrix.hermiticity_error();
        if herm > linalg::HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = linalg::min_eigenvalue(&matrix)?;
        if min_eig < PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self { dims, matrix })
    }

    /// Builds `|ψ⟩⟨ψ|` from an unnormalized vector.
    pub fn from_pure(dims: BipartiteDims, psi: &[Complex64]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let psi: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(dims, ComplexMatrix::outer(&psi, &psi))
    }

    pub fn maximally_mixed(dims: BipartiteDims) -> Self {
        let n = dims.total();
        Self {
            dims,
            matrix: ComplexMatrix::identity(n).scale_re(1.0 / n as f64),
        }
    }

    /// `(Φ⁺)`: (|00⟩ + |11⟩)/√2.
    pub fn bell_phi_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let z = c(0.0, 0.0);
        Self::from_pure(BipartiteDims::QUBIT_QUBIT, &[c(s, 0.0), z, z, c(s, 0.0)]).unwrap()
    }

    /// `ρ_A ⊗ ρ_B` from two pure local vectors.
    pub fn product_pure(dims: BipartiteDims, a: &[Complex64], b: &[Complex64]) -> Result<Self> {
        if a.len() != dims.dim_a() || b.len() != dims.dim_b() {
            return Err(Error::DimensionMismatch("local vector lengths".into()));
        }
        let psi: Vec<Complex64> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        Self::from_pure(dims, &psi)
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `(W_A ⊗ W_B) ρ (W_A ⊗ W_B)†`
    pub fn local_rotation(&self, wa: &ComplexMatrix, wb: &ComplexMatrix) -> Result<Self> {
        if wa.rows() != self.dims.dim_a() || wb.rows() != self.dims.dim_b() {
            return Err(Error::DimensionMismatch("local unitary sizes".into()));
        }
        wa.ensure_unitary(linalg::HERMITIAN_TOL)?;
        wb.ensure_unitary(linalg::HERMITIAN_TOL)?;
        let w = kron(wa, wb);
        Ok(Self {
            dims: self.dims,
            matrix: self.matrix.conjugate_by(&w).hermitian_part(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state serialization cannot fail")
    }

    /// Parses the state JSON schema. Malformed JSON yields [`Error::Parse`];
    /// well-formed input that fails the density-matrix invariants yields
    /// [`Error::InvalidState`] or [`Error::DimensionMismatch`].
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            dims: [usize; 2],
            matrix: ComplexMatrix,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let dims = BipartiteDims::new(raw.dims[0], raw.dims[1])
            .map_err(|e| Error::InvalidState(e.to_string()))?;
        Self::new(dims, raw.matrix)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Schmidt-form pure state `sin ξ|00⟩ + cos ξ|11⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PureSchmidtState {
    pub xi: f64,
}

impl PureSchmidtState {
    pub fn new(xi: f64) -> Self {
        Self { xi }
    }

    /// `t = tan ξ`
    pub fn t(&self) -> f64 {
        self.xi.tan()
    }

    pub fn vector(&self, dims: BipartiteDims) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); dims.total()];
        v[0] = c(self.xi.sin(), 0.0);
        v[dims.dim_b() + 1] = c(self.xi.cos(), 0.0);
        v
    }

    pub fn projector(&self, dims: BipartiteDims) -> ComplexMatrix {
        let v = self.vector(dims);
        ComplexMatrix::outer(&v, &v)
    }
}

/// Parameters of the general Werner state
/// `α|ψ(θ)⟩⟨ψ(θ)| + (1−α)·I/4`, `|ψ(θ)⟩ = cos θ|00⟩ + sin θ|11⟩`.
///
/// Note the amplitude order is opposite to [`PureSchmidtState`]:
/// `θ = π/2 − ξ` maps one onto the other.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WernerParams {
    pub theta: f64,
    pub alpha: f64,
}

impl WernerParams {
    pub fn new(theta: f64, alpha: f64) -> Result<Self> {
        if !(0.0..=PI + 1e-12).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, π]")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!("alpha = {alpha} outside [0, 1]")));
        }
        Ok(Self { theta, alpha })
    }

    /// `[(1 + 2|sin 2θ|)α − 1](1 + α)`
    pub fn i_ph_max_formula(&self) -> f64 {
        ((1.0 + 2.0 * (2.0 * self.theta).sin().abs()) * self.alpha - 1.0) * (1.0 + self.alpha)
    }

    /// `α` on the separability boundary `(1 + 2|sin 2θ|)α = 1` for this θ.
    pub fn boundary_alpha(theta: f64) -> f64 {
        1.0 / (1.0 + 2.0 * (2.0 * theta).sin().abs())
    }
}

/// Parameters of the maximally entangled mixed state family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemsParams {
    pub gamma: f64,
}

impl MemsParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} outside [0, 1]")));
        }
        Ok(Self { gamma })
    }

    /// `g(γ) = γ/2` for `γ ≥ 2/3`, else `1/3`.
    pub fn g(&self) -> f64 {
        if self.gamma >= 2.0 / 3.0 {
            self.gamma / 2.0
        } else {
            1.0 / 3.0
        }
    }

    /// `4γ²`
    pub fn i_ph_max_formula(&self) -> f64 {
        4.0 * self.gamma * self.gamma
    }
}

pub fn werner(params: WernerParams) -> Result<DensityMatrix> {
    let params = WernerParams::new(params.theta, params.alpha)?;
    let z = c(0.0, 0.0);
    let psi = [c(params.theta.cos(), 0.0), z, z, c(params.theta.sin(), 0.0)];
    let pure = ComplexMatrix::outer(&psi, &psi).scale_re(params.alpha);
    let noise = ComplexMatrix::identity(4).scale_re((1.0 - params.alpha) / 4.0);
    DensityMatrix::new(BipartiteDims::QUBIT_QUBIT, &pure + &noise)
}

pub fn mems(params: MemsParams) -> Result<DensityMatrix> {
    let params = MemsParams::new(params.gamma)?;
    let g = params.g();
    let h = params.gamma / 2.0;
    let m = ComplexMatrix::from_real_rows(&[
        &[g, 0.0, 0.0, h],
        &[0.0, 1.0 - 2.0 * g, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0],
        &[h, 0.0, 0.0, g],
    ])?;
    DensityMatrix::new(BipartiteDims::QUBIT_QUBIT, m)
}

/// Minimum eigenvalue of `ρ^{T_B}`; negative exactly for entangled states
/// in 2×2 and 2×3.
pub fn ppt_min_eigenvalue(rho: &DensityMatrix) -> f64 {
    let pt = linalg::partial_transpose(rho.matrix(), rho.dims()).expect("dims validated");
    linalg::min_eigenvalue(&pt).expect("partial transpose of a Hermitian matrix is Hermitian")
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if !rho.dims().is_qubit_qubit() {
        return Err(Error::Unsupported("concurrence is defined here for two qubits only".into()));
    }
    let [_, sy, _] = linalg::pauli();
    let yy = kron(&sy, &sy);
    let flipped = &(&yy * &rho.matrix().conj()) * &yy;
    // eigenvalues of ρ·ρ̃ equal those of √ρ ρ̃ √ρ, which is Hermitian
    let sqrt_rho = linalg::hermitian_eigen(rho.matrix())?.map_spectrum(|x| c(x.max(0.0).sqrt(), 0.0));
    let r = (&(&sqrt_rho * &flipped) * &sqrt_rho).hermitian_part();
    let mut lambdas: Vec<f64> = linalg::hermitian_eigenvalues(&r)?
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_unit_vector(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Hilbert–Schmidt random state `G G† / tr(G G†)` with `G` square complex
/// Gaussian (Ginibre).
pub fn random_state(dims: BipartiteDims, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = dims.total();
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian_complex(&mut rng));
    let ggd = (&g * &g.adjoint()).hermitian_part();
    let tr = ggd.trace().re;
    DensityMatrix::new(dims, ggd.scale_re(1.0 / tr)).expect("Ginibre construction is a valid state")
}

/// Convex mixture of `terms` random pure product states with flat Dirichlet
/// weights.
pub fn random_separable(dims: BipartiteDims, terms: usize, seed: u64) -> Result<DensityMatrix> {
    if terms == 0 {
        return Err(Error::InvalidParameter("terms must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..terms).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    let n = dims.total();
    let mut acc = ComplexMatrix::zeros(n, n);
    for w in raw {
        let a = random_unit_vector(dims.dim_a(), &mut rng);
        let b = random_unit_vector(dims.dim_b(), &mut rng);
        let pa = ComplexMatrix::outer(&a, &a);
        let pb = ComplexMatrix::outer(&b, &b);
        acc = &acc + &kron(&pa, &pb).scale_re(w / total);
    }
    DensityMatrix::new(dims, acc.hermitian_part())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::eigenvalues_by_char_poly;
    use std::f64::consts::FRAC_PI_4;

    fn check_invariants(rho: &DensityMatrix) {
        let m = rho.matrix();
        assert!(m.hermiticity_error() <= 1e-10);
        assert!((m.trace().re - 1.0).abs() <= 1e-10);
        assert!(linalg::min_eigenvalue(m).unwrap() >= PSD_TOL);
    }

    #[test]
    fn werner_limits() {
        let mixed = werner(WernerParams::new(FRAC_PI_4, 0.0).unwrap()).unwrap();
        assert!(mixed.matrix().max_abs_diff(&ComplexMatrix::identity(4).scale_re(0.25)) < 1e-15);
        let pure = werner(WernerParams::new(FRAC_PI_4, 1.0).unwrap()).unwrap();
        assert!(pure.matrix().max_abs_diff(DensityMatrix::bell_phi_plus().matrix()) < 1e-15);
    }

    #[test]
    fn werner_rejects_out_of_range() {
        assert!(WernerParams::new(-0.1, 0.5).is_err());
        assert!(WernerParams::new(0.5, 1.2).is_err());
        assert!(werner(WernerParams { theta: 0.3, alpha: -0.5 }).is_err());
        assert!(MemsParams::new(1.5).is_err());
        assert!(mems(MemsParams { gamma: -0.1 }).is_err());
    }

    #[test]
    fn werner_half_pt_eigenvalue_matches_char_poly_oracle() {
        let rho = werner(WernerParams::new(FRAC_PI_4, 0.5).unwrap()).unwrap();
        let pt = linalg::partial_transpose(rho.matrix(), rho.dims()).unwrap();
        let oracle = eigenvalues_by_char_poly(&pt)[0];
        assert!((oracle - (-0.125)).abs() < 1e-9);
        assert!((ppt_min_eigenvalue(&rho) - oracle).abs() < 1e-9);
    }

    #[test]
    fn bell_pt_min_eigenvalue_is_minus_half() {
        let rho = DensityMatrix::bell_phi_plus();
        let pt = linalg::partial_transpose(rho.matrix(), rho.dims()).unwrap();
        assert!((eigenvalues_by_char_poly(&pt)[0] + 0.5).abs() < 1e-9);
        assert!((ppt_min_eigenvalue(&rho) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn werner_pt_eigenvalue_line() {
        for alpha in [0.0, 1.0 / 3.0, 1.0] {
            let rho = werner(WernerParams::new(FRAC_PI_4, alpha).unwrap()).unwrap();
            let want = (1.0 - 3.0 * alpha) / 4.0;
            let pt = linalg::partial_transpose(rho.matrix(), rho.dims()).unwrap();
            let oracle = eigenvalues_by_char_poly(&pt)[0];
            assert!((oracle - want).abs() < 1e-7, "oracle {oracle} vs {want}");
            assert!((ppt_min_eigenvalue(&rho) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn werner_pt_sign_follows_boundary_line() {
        // sign of the PT minimum eigenvalue flips where (1 + 2|sin 2θ|)α = 1
        for i in 0..21 {
            let theta = PI * i as f64 / 20.0;
            for j in 0..21 {
                let alpha = j as f64 / 20.0;
                let rho = werner(WernerParams::new(theta, alpha).unwrap()).unwrap();
                let lam = ppt_min_eigenvalue(&rho);
                let boundary = (1.0 + 2.0 * (2.0 * theta).sin().abs()) * alpha - 1.0;
                if boundary.abs() > 1e-9 {
                    assert_eq!(lam >= 0.0, boundary < 0.0, "θ={theta}, α={alpha}, λ={lam}");
                } else {
                    assert!(lam.abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn mems_examples() {
        let one = mems(MemsParams::new(1.0).unwrap()).unwrap();
        assert!(one.matrix().max_abs_diff(DensityMatrix::bell_phi_plus().matrix()) < 1e-15);
        let zero = mems(MemsParams::new(0.0).unwrap()).unwrap();
        let third = 1.0 / 3.0;
        assert!(zero.matrix().max_abs_diff(&ComplexMatrix::diag(&[third, third, 0.0, third])) < 1e-15);
        let lo = MemsParams { gamma: 2.0 / 3.0 - 1e-15 }.g();
        let hi = MemsParams { gamma: 2.0 / 3.0 }.g();
        assert!((lo - hi).abs() < 1e-14);
        assert!(ppt_min_eigenvalue(&mems(MemsParams::new(0.5).unwrap()).unwrap()) < 0.0);
    }

    #[test]
    fn concurrence_examples() {
        assert!((concurrence(&DensityMatrix::bell_phi_plus()).unwrap() - 1.0).abs() < 1e-10);
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let prod = DensityMatrix::product_pure(BipartiteDims::QUBIT_QUBIT, &[one, zero], &[one, zero]).unwrap();
        assert!(concurrence(&prod).unwrap().abs() < 1e-10);
        for gamma in [0.2, 0.5, 0.9] {
            let rho = mems(MemsParams::new(gamma).unwrap()).unwrap();
            assert!((concurrence(&rho).unwrap() - gamma).abs() < 1e-7, "γ={gamma}");
        }
        let q = random_state(BipartiteDims::QUBIT_QUTRIT, 1);
        assert!(matches!(concurrence(&q), Err(Error::Unsupported(_))));
    }

    #[test]
    fn werner_concurrence_line() {
        for j in 0..=10 {
            let alpha = j as f64 / 10.0;
            let rho = werner(WernerParams::new(FRAC_PI_4, alpha).unwrap()).unwrap();
            let want = ((3.0 * alpha - 1.0) / 2.0).max(0.0);
            assert!((concurrence(&rho).unwrap() - want).abs() < 1e-9, "α={alpha}");
        }
    }

    #[test]
    fn maximally_mixed_is_pt_invariant() {
        let rho = DensityMatrix::maximally_mixed(BipartiteDims::QUBIT_QUBIT);
        assert!((ppt_min_eigenvalue(&rho) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn random_state_is_deterministic_and_valid() {
        for dims in [BipartiteDims::QUBIT_QUBIT, BipartiteDims::QUBIT_QUTRIT] {
            assert_eq!(random_state(dims, 42), random_state(dims, 42));
            assert_ne!(random_state(dims, 42), random_state(dims, 43));
            for seed in 0..500 {
                check_invariants(&random_state(dims, seed));
            }
        }
    }

    #[test]
    fn hs_ensemble_has_mixed_entanglement_fraction() {
        let n = 400;
        let entangled = (0..n)
            .filter(|&s| ppt_min_eigenvalue(&random_state(BipartiteDims::QUBIT_QUBIT, s)) < 0.0)
            .count();
        assert!(entangled > 0 && entangled < n as usize, "entangled {entangled}/{n}");
    }

    #[test]
    fn random_separable_is_ppt() {
        let single = random_separable(BipartiteDims::QUBIT_QUBIT, 1, 9).unwrap();
        assert!(concurrence(&single).unwrap() < 1e-7);
        assert!(random_separable(BipartiteDims::QUBIT_QUBIT, 0, 9).is_err());
        for seed in 0..200 {
            let rho = random_separable(BipartiteDims::QUBIT_QUTRIT, 1 + (seed as usize % 6), seed).unwrap();
            check_invariants(&rho);
            assert!(ppt_min_eigenvalue(&rho) >= -1e-10);
            let rho = random_separable(BipartiteDims::QUBIT_QUBIT, 1 + (seed as usize % 6), seed).unwrap();
            assert!(ppt_min_eigenvalue(&rho) >= -1e-10);
        }
    }

    #[test]
    fn schmidt_state_is_normalized() {
        for k in 0..16 {
            let s = PureSchmidtState::new(k as f64 * 0.4);
            for dims in [BipartiteDims::QUBIT_QUBIT, BipartiteDims::QUBIT_QUTRIT] {
                let norm: f64 = s.vector(dims).iter().map(|z| z.norm_sqr()).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn json_round_trip_and_rejections() {
        let rho = random_state(BipartiteDims::QUBIT_QUTRIT, 5);
        let back = DensityMatrix::from_json(&rho.to_json()).unwrap();
        assert_eq!(back, rho);
        assert!(matches!(DensityMatrix::from_json("{not json"), Err(Error::Parse(_))));
        let bad_trace = r#"{"dims":[2,2],"matrix":[[{"re":1,"im":0},{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":1,"im":0},{"re":0,"im":0},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0}]]}"#;
        assert!(matches!(DensityMatrix::from_json(bad_trace), Err(Error::InvalidState(_))));
        let neg = r#"{"dims":[2,2],"matrix":[[{"re":1.5,"im":0},{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":-0.5,"im":0},{"re":0,"im":0},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0}],
            [{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0},{"re":0,"im":0}]]}"#;
        assert!(matches!(DensityMatrix::from_json(neg), Err(Error::InvalidState(_))));
    }
}

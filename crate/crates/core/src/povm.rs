//! Tetrahedron qubit POVM, 9-outcome qutrit simplex POVM, local rotations of
//! both, and the dual frame that expands any operator in a POVM's elements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};

/// Bloch vectors of the tetrahedron POVM (unit vectors, each divided by √3
/// at construction): `(1,1,1)`, `(1,−1,−1)`, `(−1,1,−1)`, `(−1,−1,1)`.
pub const TETRAHEDRON_DIRECTIONS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

/// Unit vertices of the regular 8-simplex in the Gell-Mann Bloch space,
/// components ordered `λ₁ … λ₈`.
///
/// Vertex `i` is `(e_i − 𝟙/9)/√(8/9)` written in the Helmert basis of the
/// hyperplane `Σx = 0` of ℝ⁹. Pairwise inner products are −1/8 and the
/// vertices sum to zero.
pub const SIMPLEX_VERTICES: [[f64; 8]; 9] = [
    [0.75, 0.4330127018922194, 0.3061862178478973, 0.2371708245126284, 0.1936491673103708, 0.1636634176769943, 0.1417366773784602, 0.125],
    [-0.75, 0.4330127018922194, 0.3061862178478973, 0.2371708245126284, 0.1936491673103708, 0.1636634176769943, 0.1417366773784602, 0.125],
    [0.0, -0.8660254037844388, 0.3061862178478973, 0.2371708245126284, 0.1936491673103708, 0.1636634176769943, 0.1417366773784602, 0.125],
    [0.0, 0.0, -0.9185586535436918, 0.2371708245126284, 0.1936491673103708, 0.1636634176769943, 0.1417366773784602, 0.125],
    [0.0, 0.0, 0.0, -0.9486832980505138, 0.1936491673103708, 0.1636634176769943, 0.1417366773784602, 0.125],
    [0.0, 0.0, 0.0, 0.0, -0.9682458365518543, 0.1636634176769943, 0.1417366773784602, 0.125],
    [0.0, 0.0, 0.0, 0.0, 0.0, -0.9819805060619656, 0.1417366773784602, 0.125],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.9921567416492215, 0.125],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0],
];

const POVM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector(Vec<f64>);

impl BlochVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() != 3 && components.len() != 8 {
            return Err(Error::DimensionMismatch(format!(
                "Bloch vector must have 3 or 8 components, got {}",
                components.len()
            )));
        }
        let norm = components.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("Bloch vector norm {norm} is not 1")));
        }
        Ok(Self(components))
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// `v·σ` (qubit) or `v·λ` (qutrit).
    pub fn operator(&self) -> ComplexMatrix {
        let (dim, basis): (usize, Vec<ComplexMatrix>) = if self.0.len() == 3 {
            (2, linalg::pauli().to_vec())
        } else {
            (3, linalg::gell_mann().to_vec())
        };
        self.0
            .iter()
            .zip(&basis)
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (&x, m)| &acc + &m.scale_re(x))
    }
}

pub fn tetrahedron_vectors() -> [BlochVector; 4] {
    let s = 1.0 / 3f64.sqrt();
    TETRAHEDRON_DIRECTIONS.map(|d| BlochVector::new(d.iter().map(|x| x * s).collect()).unwrap())
}

pub fn simplex_vectors() -> [BlochVector; 9] {
    SIMPLEX_VERTICES.map(|v| BlochVector::new(v.to_vec()).unwrap())
}

/// A complete set of positive operators on a 2- or 3-dimensional space.
#[derive(Clone, Debug, PartialEq)]
pub struct PovmSet {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl PovmSet {
    /// Checks positivity (min eigenvalue ≥ −1e-10) and completeness
    /// (`Σ Fᵢ = I` within 1e-10).
    pub fn new(dim: usize, elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidParameter("POVM has no elements".into()));
        }
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in elements.iter().enumerate() {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch(format!("POVM element {i} is not {dim}x{dim}")));
            }
            let min = linalg::min_eigenvalue(e)?;
            if min < -POVM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "POVM element {i} has negative eigenvalue {min:.3e}"
                )));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if dev > POVM_TOL {
            return Err(Error::InvalidParameter(format!(
                "POVM elements sum to identity only within {dev:.3e}"
            )));
        }
        Ok(Self { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    /// `U Fᵢ U†` for every element.
    pub fn rotate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim || u.cols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "rotation must be {d}x{d}",
                d = self.dim
            )));
        }
        u.ensure_unitary(linalg::HERMITIAN_TOL)?;
        Ok(Self {
            dim: self.dim,
            elements: self
                .elements
                .iter()
                .map(|f| f.conjugate_by(u).hermitian_part())
                .collect(),
        })
    }

    /// `Gram_ij = tr(Fᵢ Fⱼ)`, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.len();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = self.elements[i].trace_of_product(&self.elements[j]).re;
            }
        }
        g
    }

    /// Dual operators `Gᵢ = Σⱼ (Gram⁻¹)ᵢⱼ Fⱼ` so that
    /// `O = Σᵢ tr(Gᵢ O) Fᵢ` for every operator `O`.
    pub fn dual_frame(&self) -> Result<DualFrame> {
        let n = self.len();
        if n != self.dim * self.dim {
            return Err(Error::SingularGram);
        }
        let inv = linalg::invert_real(&self.gram(), n, 1e-10).ok_or(Error::SingularGram)?;
        let duals = (0..n)
            .map(|i| {
                (0..n).fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, j| {
                    &acc + &self.elements[j].scale_re(inv[i * n + j])
                })
            })
            .collect();
        Ok(DualFrame { dim: self.dim, duals })
    }
}

/// The four elements `(1 + n̂ᵢ·σ)/4` of the tetrahedron POVM.
pub fn qubit_tetrahedron() -> PovmSet {
    let id = ComplexMatrix::identity(2);
    let elements = tetrahedron_vectors()
        .iter()
        .map(|n| (&id + &n.operator()).scale_re(0.25))
        .collect();
    PovmSet::new(2, elements).expect("tetrahedron POVM is valid")
}

/// The nine elements `(1/9)(1 + (√3/2) v̂ᵢ·λ)` of the qutrit simplex POVM.
pub fn qutrit_simplex() -> PovmSet {
    let id = ComplexMatrix::identity(3);
    let k = 3f64.sqrt() / 2.0;
    let elements = simplex_vectors()
        .iter()
        .map(|v| (&id + &v.operator().scale_re(k)).scale_re(1.0 / 9.0))
        .collect();
    PovmSet::new(3, elements).expect("simplex POVM is valid")
}

#[derive(Clone, Debug)]
pub struct DualFrame {
    dim: usize,
    duals: Vec<ComplexMatrix>,
}

impl DualFrame {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn duals(&self) -> &[ComplexMatrix] {
        &self.duals
    }

    /// Expansion coefficients `tr(Gᵢ O)`; real for Hermitian `O`.
    pub fn coefficients(&self, o: &ComplexMatrix) -> Vec<num_complex::Complex64> {
        self.duals.iter().map(|g| g.trace_of_product(o)).collect()
    }

    /// `Σᵢ tr(Gᵢ O) Fᵢ`
    pub fn reconstruct(&self, povm: &PovmSet, o: &ComplexMatrix) -> ComplexMatrix {
        self.coefficients(o)
            .into_iter()
            .zip(povm.elements())
            .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, (w, f)| &acc + &f.scale(w))
    }
}

/// `Fᵢᵀ = constant·I − F_partner`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransposeRelation {
    pub index: usize,
    pub constant: f64,
    pub partner: usize,
}

/// Transpose relations of the (unrotated) tetrahedron POVM: transposition
/// flips the y-component of each n̂ᵢ, which lands on −n̂ⱼ for a partner j,
/// hence `Fᵢᵀ = 1/2 − Fⱼ`. There is no such closed permutation for the
/// qutrit simplex, so qutrit sets are rejected.
pub fn partial_transpose_map(povm: &PovmSet) -> Result<Vec<TransposeRelation>> {
    if povm.dim() != 2 || povm.len() != 4 {
        return Err(Error::Unsupported(
            "transpose relations only close for the qubit tetrahedron".into(),
        ));
    }
    let half = ComplexMatrix::identity(2).scale_re(0.5);
    let mut out = Vec::with_capacity(4);
    for (i, f) in povm.elements().iter().enumerate() {
        let ft = f.transpose();
        let partner = (0..4)
            .find(|&j| (&ft + povm.element(j)).max_abs_diff(&half) < 1e-12)
            .ok_or_else(|| {
                Error::Unsupported(format!("element {i} has no antipodal partner under transpose"))
            })?;
        out.push(TransposeRelation { index: i, constant: 0.5, partner });
    }
    Ok(out)
}

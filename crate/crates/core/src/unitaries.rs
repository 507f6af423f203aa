//! Charts on SU(2) and SU(3) used as search coordinates for the local
//! measurement rotations.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, BipartiteDims, ComplexMatrix};

/// ZYZ Euler angles: `exp(iφσ_z/2)·exp(iθσ_y/2)·exp(iψσ_z/2)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Su2Params {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl Su2Params {
    pub fn new(phi: f64, theta: f64, psi: f64) -> Self {
        Self { phi, theta, psi }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.phi, self.theta, self.psi]
    }

    pub fn sample(rng: &mut impl Rng) -> Self {
        Self {
            phi: rng.random_range(0.0..2.0 * PI),
            theta: rng.random_range(0.0..2.0 * PI),
            psi: rng.random_range(0.0..2.0 * PI),
        }
    }

    /// Euler angles of `u` modulo a global phase.
    pub fn fit(u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != 2 || u.cols() != 2 {
            return Err(Error::DimensionMismatch("SU(2) fit needs a 2x2 matrix".into()));
        }
        u.ensure_unitary(1e-8)?;
        let half_phase = c(0.0, -0.5 * u.determinant().arg()).exp();
        let a = u[(0, 0)] * half_phase;
        let b = u[(0, 1)] * half_phase;
        let theta = 2.0 * b.norm().atan2(a.norm());
        let arg_a = if a.norm() > 1e-14 { a.arg() } else { 0.0 };
        let arg_b = if b.norm() > 1e-14 { b.arg() } else { 0.0 };
        Ok(Self {
            phi: arg_a + arg_b,
            theta,
            psi: arg_a - arg_b,
        })
    }
}

pub fn su2(p: Su2Params) -> ComplexMatrix {
    let (s, cs) = (0.5 * p.theta).sin_cos();
    let a = c(0.0, 0.5 * (p.phi + p.psi)).exp() * cs;
    let b = c(0.0, 0.5 * (p.phi - p.psi)).exp() * s;
    ComplexMatrix::from_rows(vec![vec![a, b], vec![-b.conj(), a.conj()]]).unwrap()
}

/// Coefficients of the Gell-Mann generators in `exp(i Σ c_a λ_a)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Su3Params {
    pub c: [f64; 8],
}

impl Su3Params {
    pub fn sample(rng: &mut impl Rng) -> Self {
        Self {
            c: std::array::from_fn(|_| rng.random_range(-PI..=PI)),
        }
    }
}

pub fn su3(p: &Su3Params) -> ComplexMatrix {
    let gm = linalg::gell_mann();
    let h = p
        .c
        .iter()
        .zip(&gm)
        .fold(ComplexMatrix::zeros(3, 3), |acc, (&x, l)| &acc + &l.scale_re(x));
    linalg::hermitian_eigen(&h)
        .expect("real combination of Gell-Mann matrices is Hermitian")
        .map_spectrum(|x| c(x.cos(), x.sin()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Su2,
    Su3,
}

impl Group {
    pub fn param_count(self) -> usize {
        match self {
            Group::Su2 => 3,
            Group::Su3 => 8,
        }
    }

    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Group::Su2),
            3 => Ok(Group::Su3),
            d => Err(Error::Unsupported(format!("no local group chart for dimension {d}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupParams {
    Su2(Su2Params),
    Su3(Su3Params),
}

impl GroupParams {
    pub fn group(&self) -> Group {
        match self {
            GroupParams::Su2(_) => Group::Su2,
            GroupParams::Su3(_) => Group::Su3,
        }
    }

    pub fn identity(group: Group) -> Self {
        match group {
            Group::Su2 => GroupParams::Su2(Su2Params::default()),
            Group::Su3 => GroupParams::Su3(Su3Params::default()),
        }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        match self {
            GroupParams::Su2(p) => su2(*p),
            GroupParams::Su3(p) => su3(p),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            GroupParams::Su2(p) => p.to_array().to_vec(),
            GroupParams::Su3(p) => p.c.to_vec(),
        }
    }

    pub fn from_slice(group: Group, x: &[f64]) -> Result<Self> {
        if x.len() != group.param_count() {
            return Err(Error::DimensionMismatch(format!(
                "{group:?} needs {} parameters, got {}",
                group.param_count(),
                x.len()
            )));
        }
        Ok(match group {
            Group::Su2 => GroupParams::Su2(Su2Params::new(x[0], x[1], x[2])),
            Group::Su3 => GroupParams::Su3(Su3Params {
                c: std::array::from_fn(|i| x[i]),
            }),
        })
    }

    pub fn sample(group: Group, rng: &mut impl Rng) -> Self {
        match group {
            Group::Su2 => GroupParams::Su2(Su2Params::sample(rng)),
            Group::Su3 => GroupParams::Su3(Su3Params::sample(rng)),
        }
    }
}

/// Uniform angles in `[0, 2π)` for SU(2), uniform coefficients in `[−π, π]`
/// for SU(3). Deterministic per seed.
pub fn random_params(group: Group, seed: u64) -> GroupParams {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    GroupParams::sample(group, &mut rng)
}

/// Local settings `(U, V)`: `U ∈ SU(2)` on subsystem A, `V ∈ SU(2)` or
/// `SU(3)` on subsystem B.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalUnitaryPair {
    pub u: Su2Params,
    pub v: GroupParams,
}

impl LocalUnitaryPair {
    pub fn identity(dims: BipartiteDims) -> Self {
        let group = Group::for_dim(dims.dim_b()).expect("dims are validated");
        Self {
            u: Su2Params::default(),
            v: GroupParams::identity(group),
        }
    }

    /// Flat search vector length: 6 for 2×2, 11 for 2×3.
    pub fn param_len(dims: BipartiteDims) -> usize {
        3 + Group::for_dim(dims.dim_b()).map(Group::param_count).unwrap_or(0)
    }

    pub fn from_vector(dims: BipartiteDims, x: &[f64]) -> Result<Self> {
        if x.len() != Self::param_len(dims) {
            return Err(Error::DimensionMismatch(format!(
                "settings vector for {dims} needs {} entries, got {}",
                Self::param_len(dims),
                x.len()
            )));
        }
        Ok(Self {
            u: Su2Params::new(x[0], x[1], x[2]),
            v: GroupParams::from_slice(Group::for_dim(dims.dim_b())?, &x[3..])?,
        })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = self.u.to_array().to_vec();
        x.extend(self.v.to_vec());
        x
    }

    pub fn sample(dims: BipartiteDims, rng: &mut impl Rng) -> Self {
        let group = Group::for_dim(dims.dim_b()).expect("dims are validated");
        Self {
            u: Su2Params::sample(rng),
            v: GroupParams::sample(group, rng),
        }
    }

    pub fn matrices(&self) -> (ComplexMatrix, ComplexMatrix) {
        (su2(self.u), self.v.matrix())
    }
}

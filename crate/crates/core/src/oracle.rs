//! Test-only reference computations that do not go through the Jacobi
//! eigensolver.

use num_complex::Complex64;

use crate::linalg::ComplexMatrix;

/// Characteristic polynomial coefficients `[1, c₁, …, c_n]` of
/// `det(λI − M) = λⁿ + c₁λⁿ⁻¹ + … + c_n` via Faddeev–LeVerrier.
pub fn characteristic_polynomial(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.rows();
    let id = ComplexMatrix::identity(n);
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut mk = ComplexMatrix::zeros(n, n);
    for k in 1..=n {
        let prev = *coeffs.last().unwrap();
        mk = &(m * &mk) + &id.scale(prev);
        let ck = -(m * &mk).trace() / k as f64;
        coeffs.push(ck);
    }
    coeffs
}

/// All roots of a monic polynomial by Durand–Kerner iteration.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    // Newton polish; only moves roots where the derivative is well away from zero
    let deriv: Vec<Complex64> = coeffs[..n]
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (n - k) as f64)
        .collect();
    let eval_d = |z: Complex64| deriv.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let d = eval_d(*r);
            if d.norm() < 1e-6 {
                break;
            }
            *r -= eval(*r) / d;
        }
    }
    roots
}

/// Ascending eigenvalues of a Hermitian matrix from its characteristic
/// polynomial. Roots of a repeated eigenvalue scatter by roughly
/// `eps^(1/k)`; their mean is well conditioned, so clusters are averaged.
pub fn eigenvalues_by_char_poly(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = polynomial_roots(&characteristic_polynomial(m))
        .into_iter()
        .map(|z| z.re)
        .collect();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(v.len());
    let mut start = 0;
    for i in 1..=v.len() {
        if i == v.len() || v[i] - v[i - 1] > 1e-3 {
            let mean = v[start..i].iter().sum::<f64>() / (i - start) as f64;
            out.extend(std::iter::repeat_n(mean, i - start));
            start = i;
        }
    }
    out
}

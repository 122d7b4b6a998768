//! Two-qubit entanglement measures: concurrence by the Wootters
//! construction and the entanglement of formation it determines.
//!
//! The concurrence of rho is lambda_0 - lambda_1 - lambda_2 - lambda_3
//! clamped to [0, 1], where the lambda_i are the decreasingly ordered
//! square roots of the eigenvalues of rho rho~, with
//! rho~ = (Y x Y) rho* (Y x Y) the spin-flipped state. Computing those
//! square roots through the product loses half the working precision on
//! nearly pure states (eigensolver noise of 1e-16 turns into 1e-8 after
//! the square root), so this module uses the equivalent factorized form:
//! for any decomposition rho = X X^dagger, the lambda_i are the singular
//! values of the complex symmetric matrix X^T (Y x Y) X, reached here
//! without squaring anything. For a pure state the matrix is 1x1 and the
//! construction collapses to the exact |<psi*|Y x Y|psi>|.
//!
//! Entanglement of formation follows as the binary entropy of
//! (1 + sqrt(1 - C^2)) / 2; it is monotone in C, so "entangled" and
//! "C > 0" are interchangeable everywhere downstream.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat};
use num_complex::Complex64 as C64;

/// Eigenvalues of a Hermitian 4x4 matrix, descending. Errors when the
/// Hermiticity residue reaches 1e-10.
pub fn hermitian_eig4(m: &CMat) -> Result<Vec<f64>> {
    if m.n() != 4 {
        return Err(Error::invalid("matrix", "expected a 4x4 matrix"));
    }
    if m.hermiticity_residue() >= 1e-10 {
        return Err(Error::invalid("matrix", "matrix is not Hermitian to 1e-10"));
    }
    let (mut eigs, _) = hermitian_eigen(&m.hermitize());
    eigs.reverse();
    Ok(eigs)
}

/// The four Wootters numbers of a state, descending. Equal to the square
/// roots of the eigenvalues of rho (Y x Y) rho* (Y x Y); computed as the
/// singular values of X^T (Y x Y) X for a factor X with rho = X X^dagger,
/// which stays accurate to machine precision even for (nearly) pure input.
pub fn wootters_lambdas(rho: &CMat) -> Result<[f64; 4]> {
    if rho.n() != 4 {
        return Err(Error::invalid("rho", "expected a 4x4 density matrix"));
    }
    if rho.hermiticity_residue() >= 1e-10 {
        return Err(Error::invalid("rho", "density matrix is not Hermitian to 1e-10"));
    }
    let (eigs, vecs) = hermitian_eigen(&rho.hermitize());
    if eigs[0] < -1e-10 {
        return Err(Error::invalid("rho", "density matrix is not positive semidefinite"));
    }
    let p_max = *eigs.last().expect("4x4 spectrum");
    if p_max <= 0.0 {
        return Err(Error::invalid("rho", "density matrix has no positive weight"));
    }
    // Keep only eigenvalues carrying real weight. Anything within a few
    // hundred ulps of zero is eigensolver noise, and noise of size eps
    // would leak lambda mass of size sqrt(eps) if kept.
    let floor = 256.0 * f64::EPSILON * p_max;
    let kept: Vec<usize> = (0..4).filter(|&k| eigs[k] > floor).collect();
    let k = kept.len();
    // columns of the factor: x_i = sqrt(p_i) v_i, so rho = sum_i x_i x_i^dagger
    let mut x = vec![[C64::new(0.0, 0.0); 4]; k];
    for (col, &src) in x.iter_mut().zip(&kept) {
        let w = eigs[src].sqrt();
        for a in 0..4 {
            col[a] = vecs.at(a, src) * w;
        }
    }
    // tau = X^T (Y x Y) X with (Y x Y) = antidiag(-1, 1, 1, -1); complex
    // symmetric, k x k, and unitarily equivalent in singular values to the
    // full Wootters product
    let sign = [-1.0, 1.0, 1.0, -1.0];
    let mut tau = CMat::zeros(k);
    for i in 0..k {
        for j in 0..k {
            let mut z = C64::new(0.0, 0.0);
            for a in 0..4 {
                z += x[i][a] * x[j][3 - a] * sign[a];
            }
            *tau.at_mut(i, j) = z;
        }
    }
    let mut lambdas = [0.0f64; 4];
    if k == 1 {
        lambdas[0] = tau.at(0, 0).norm();
    } else {
        // singular values via the Hermitian embedding [[0, tau], [tau^dagger, 0]],
        // whose spectrum is the +/- pairs of the singular values
        let mut embed = CMat::zeros(2 * k);
        for i in 0..k {
            for j in 0..k {
                *embed.at_mut(i, k + j) = tau.at(i, j);
                *embed.at_mut(k + j, i) = tau.at(i, j).conj();
            }
        }
        let (sigma, _) = hermitian_eigen(&embed);
        for (slot, &s) in lambdas.iter_mut().zip(sigma.iter().rev().take(k)) {
            *slot = s.max(0.0);
        }
    }
    Ok(lambdas)
}

/// Concurrence of a two-qubit density matrix, clamped to [0, 1].
pub fn concurrence(rho: &CMat) -> Result<f64> {
    let l = wootters_lambdas(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).clamp(0.0, 1.0))
}

/// Shannon entropy of {x, 1-x} in bits.
fn binary_entropy(x: f64) -> f64 {
    let mut h = 0.0;
    for p in [x, 1.0 - x] {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Entanglement of formation from a concurrence value in [0, 1]
/// (tolerating 1e-12 of overshoot on either end).
pub fn eof_from_concurrence(c: f64) -> Result<f64> {
    if !c.is_finite() || c < -1e-12 || c > 1.0 + 1e-12 {
        return Err(Error::invalid("concurrence", "value must lie in [0, 1]"));
    }
    let c = c.clamp(0.0, 1.0);
    Ok(binary_entropy(0.5 * (1.0 + (1.0 - c * c).sqrt())))
}

/// Entanglement of formation of a state.
pub fn eof(rho: &CMat) -> Result<f64> {
    eof_from_concurrence(concurrence(rho)?)
}

/// Entanglement of formation of a pure 4-vector, computed on a route that
/// never touches the Wootters numbers: the von Neumann entropy of the
/// reduced single-qubit state. Exists to confront [`eof`] in tests.
pub fn pure_state_eof_oracle(psi: &[C64; 4]) -> Result<f64> {
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("psi", "state vector must be normalized to 1e-12"));
    }
    // reduced state of the first qubit: 2x2 with rows {00,01} and {10,11}
    let a = psi[0].norm_sqr() + psi[1].norm_sqr();
    let d = psi[2].norm_sqr() + psi[3].norm_sqr();
    let c = psi[0] * psi[2].conj() + psi[1] * psi[3].conj();
    // closed-form eigenvalues of [[a, c], [c*, d]]
    let mean = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + c.norm_sqr()).sqrt();
    Ok(binary_entropy((mean + disc).clamp(0.0, 1.0)))
}

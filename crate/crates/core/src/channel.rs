//! The two-qubit pure-dephasing channel: validated density matrices, the
//! five diagonal Kraus operators, the diagonal unitary, and the closed-form
//! off-diagonal multipliers.
//!
//! Every operator is diagonal in the computational basis |00>, |01>, |10>,
//! |11>, so the channel only rescales and rephases off-diagonal elements;
//! populations never move. The Kraus set is complete for any amplitudes
//! a, b in (0, 1]: the completeness sum telescopes to the identity through
//! the polynomial identity x + (x-1)^2(x+1) + (1-x)x^2 = 1.
//!
//! [`apply_channel`] performs the literal operator sum; the independent
//! closed form [`analytic_multipliers`] exists so tests can confront the
//! two routes rather than trusting one.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMat};
use num_complex::Complex64 as C64;

/// Validated 4x4 density matrix of the qubit pair.
///
/// Constructors enforce Hermiticity to 1e-12, unit trace to 1e-12 and
/// positive semidefiniteness to an eigenvalue floor of -1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    rho: CMat,
}

/// Eigenvalue floor absorbing roundoff in the positivity check.
pub const PSD_FLOOR: f64 = -1e-10;

impl TwoQubitState {
    pub fn from_matrix(rho: CMat) -> Result<Self> {
        if rho.n() != 4 {
            return Err(Error::invalid("rho", "state must be 4x4"));
        }
        if rho.hermiticity_residue() > 1e-12 {
            return Err(Error::invalid("rho", "state must be Hermitian to 1e-12"));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::invalid("rho", "state must have unit trace to 1e-12"));
        }
        let (eigs, _) = hermitian_eigen(&rho.hermitize());
        if eigs.iter().any(|&e| e < PSD_FLOOR) {
            return Err(Error::invalid("rho", "state must be positive semidefinite"));
        }
        Ok(TwoQubitState { rho })
    }

    /// Projector onto a normalized 4-vector.
    pub fn from_pure(psi: &[C64; 4]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("psi", "state vector must be normalized to 1e-12"));
        }
        let mut rho = CMat::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                *rho.at_mut(i, j) = psi[i] * psi[j].conj();
            }
        }
        Ok(TwoQubitState { rho })
    }

    pub fn rho(&self) -> &CMat {
        &self.rho
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.rho.at(i, j)
    }

    pub fn diagonal(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.rho.at(i, i).re)
    }
}

/// The channel at one time point: five diagonal Kraus operators (their
/// diagonals are real) and the diagonal unitary phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOps {
    /// Diagonals of K0..K4.
    pub kraus: [[f64; 4]; 5],
    /// Diagonal of the unitary: [1, e^{i phi_loc}, e^{i phi_loc}, e^{i phi_bi_total}].
    pub unitary_diag: [C64; 4],
}

/// Assemble the Kraus set and unitary for amplitudes `a`, `b` and the two
/// phases. The amplitudes must lie in (0, 1].
pub fn build_channel(a: f64, b: f64, phi_loc: f64, phi_bi_total: f64) -> Result<ChannelOps> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v.is_finite() && v > 0.0 && v <= 1.0) {
            return Err(Error::invalid(name, "amplitude must lie in (0, 1]"));
        }
    }
    if !(phi_loc.is_finite() && phi_bi_total.is_finite()) {
        return Err(Error::invalid("phi", "phases must be finite"));
    }
    let (a2, b2) = (a * a, b * b);
    let kraus = [
        [a, b, b, a],
        [(a2 - 1.0) * (a2 + 1.0).sqrt(), 0.0, 0.0, 0.0],
        [
            (1.0 - a2).sqrt() * -a2,
            0.0,
            0.0,
            (1.0 - a2).sqrt(),
        ],
        [0.0, 0.0, (b2 - 1.0) * (b2 + 1.0).sqrt(), 0.0],
        [0.0, (1.0 - b2).sqrt(), (1.0 - b2).sqrt() * -b2, 0.0],
    ];
    let phase = |p: f64| C64::new(p.cos(), p.sin());
    let unitary_diag = [C64::new(1.0, 0.0), phase(phi_loc), phase(phi_loc), phase(phi_bi_total)];
    Ok(ChannelOps { kraus, unitary_diag })
}

impl ChannelOps {
    /// Sum of K^dagger K minus the identity, as a Frobenius residue.
    pub fn completeness_residue(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..4 {
            let s: f64 = self.kraus.iter().map(|k| k[i] * k[i]).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }
}

/// Apply the channel to an arbitrary 4x4 matrix by the literal operator
/// sum U (sum_mu K_mu m K_mu^dagger) U^dagger. No state validation; the
/// public path is [`apply_channel`].
fn apply_raw(m: &CMat, ops: &ChannelOps) -> CMat {
    let mut accum = CMat::zeros(4);
    for k in &ops.kraus {
        // K m K^dagger for diagonal real K
        for i in 0..4 {
            for j in 0..4 {
                *accum.at_mut(i, j) += m.at(i, j) * k[i] * k[j];
            }
        }
    }
    let mut out = CMat::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            *out.at_mut(i, j) = ops.unitary_diag[i] * accum.at(i, j) * ops.unitary_diag[j].conj();
        }
    }
    out
}

/// Evolve a state through the channel.
pub fn apply_channel(state: &TwoQubitState, ops: &ChannelOps) -> Result<TwoQubitState> {
    TwoQubitState::from_matrix(apply_raw(state.rho(), ops))
}

/// Closed-form off-diagonal multipliers `(a*b, a^4, b^4)`: the first acts
/// on every coherence between a singly excited state and its neighbors,
/// the second on the ground-to-double coherence, the third on the
/// coherence inside the singly excited pair.
pub fn analytic_multipliers(a: f64, b: f64) -> Result<(f64, f64, f64)> {
    for (name, v) in [("a", a), ("b", b)] {
        if !(v.is_finite() && v > 0.0 && v <= 1.0) {
            return Err(Error::invalid(name, "amplitude must lie in (0, 1]"));
        }
    }
    Ok((a * b, a.powi(4), b.powi(4)))
}

/// Choi matrix of the channel: apply the channel to each elementary matrix
/// |i><j| and stack the results as the (i, j) blocks of a 16x16 matrix.
/// Complete positivity of the channel is positive semidefiniteness here.
pub fn choi_matrix(ops: &ChannelOps) -> CMat {
    let mut choi = CMat::zeros(16);
    for i in 0..4 {
        for j in 0..4 {
            let mut e = CMat::zeros(4);
            *e.at_mut(i, j) = C64::new(1.0, 0.0);
            let mapped = apply_raw(&e, ops);
            for p in 0..4 {
                for q in 0..4 {
                    *choi.at_mut(4 * p + i, 4 * q + j) = mapped.at(p, q);
                }
            }
        }
    }
    choi
}

/// Trace the output factor out of a Choi matrix; the identity signals a
/// trace-preserving channel.
pub fn choi_partial_trace(choi: &CMat) -> CMat {
    let mut out = CMat::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let mut s = C64::new(0.0, 0.0);
            for p in 0..4 {
                s += choi.at(4 * p + i, 4 * p + j);
            }
            *out.at_mut(i, j) = s;
        }
    }
    out
}

/// Smallest eigenvalue of the Hermitized Choi matrix.
pub fn choi_min_eigenvalue(choi: &CMat) -> f64 {
    let (eigs, _) = hermitian_eigen(&choi.hermitize());
    eigs.into_iter().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_state(rng: &mut StdRng) -> TwoQubitState {
        // random pure states mixed with weights: always a valid state
        let mut rho = CMat::zeros(4);
        let mut weights = [0.0; 3];
        for w in &mut weights {
            *w = rng.gen_range(0.1..1.0);
        }
        let total: f64 = weights.iter().sum();
        for &w in &weights {
            let mut psi = [C64::new(0.0, 0.0); 4];
            let mut norm2 = 0.0;
            for z in &mut psi {
                *z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                norm2 += z.norm_sqr();
            }
            let scale = (w / total / norm2).sqrt();
            for i in 0..4 {
                for j in 0..4 {
                    *rho.at_mut(i, j) += psi[i] * psi[j].conj() * scale * scale;
                }
            }
        }
        TwoQubitState::from_matrix(rho.hermitize()).unwrap()
    }

    #[test]
    fn state_constructor_enforces_invariants() {
        let mut bad_trace = CMat::identity(4);
        *bad_trace.at_mut(0, 0) = C64::new(0.5, 0.0);
        assert!(TwoQubitState::from_matrix(bad_trace).is_err());

        let mut non_herm = CMat::zeros(4);
        for i in 0..4 {
            *non_herm.at_mut(i, i) = C64::new(0.25, 0.0);
        }
        *non_herm.at_mut(0, 1) = C64::new(0.1, 0.0);
        assert!(TwoQubitState::from_matrix(non_herm).is_err());

        // negative eigenvalue, Hermitian, unit trace
        let mut neg = CMat::zeros(4);
        *neg.at_mut(0, 0) = C64::new(1.2, 0.0);
        *neg.at_mut(1, 1) = C64::new(-0.2, 0.0);
        assert!(TwoQubitState::from_matrix(neg).is_err());

        let unnorm = [C64::new(1.0, 0.0); 4];
        assert!(TwoQubitState::from_pure(&unnorm).is_err());
    }

    #[test]
    fn identity_channel_is_the_identity() {
        let ops = build_channel(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(ops.kraus[1], [0.0; 4]);
        assert_eq!(ops.kraus[2], [0.0; 4]);
        assert_eq!(ops.kraus[3], [0.0; 4]);
        assert_eq!(ops.kraus[4], [0.0; 4]);
        let mut rng = StdRng::seed_from_u64(7);
        let state = random_state(&mut rng);
        let out = apply_channel(&state, &ops).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!((out.entry(i, j) - state.entry(i, j)).norm(), 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn half_open_domain_is_enforced() {
        assert!(build_channel(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(build_channel(1.0, 1.1, 0.0, 0.0).is_err());
        assert!(build_channel(-0.5, 0.5, 0.0, 0.0).is_err());
        assert!(build_channel(0.5, 0.5, f64::NAN, 0.0).is_err());
        assert!(analytic_multipliers(0.0, 0.5).is_err());
        // b = 1 shuts down the antisymmetric Kraus pair entirely
        let ops = build_channel(0.9, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(ops.kraus[3], [0.0; 4]);
        assert_eq!(ops.kraus[4], [0.0; 4]);
    }

    #[test]
    fn completeness_holds_across_the_domain() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..100 {
            let a = rng.gen_range(1e-6..=1.0_f64);
            let b = rng.gen_range(1e-6..=1.0_f64);
            let ops = build_channel(a, b, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)).unwrap();
            assert!(ops.completeness_residue() < 1e-12, "residue at a={a}, b={b}");
        }
    }

    #[test]
    fn operator_sum_matches_closed_form_multipliers() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..100 {
            let a = rng.gen_range(0.05..=1.0_f64);
            let b = rng.gen_range(0.05..=1.0_f64);
            let phi_l = rng.gen_range(-3.0..3.0);
            let phi_b = rng.gen_range(-3.0..3.0);
            let ops = build_channel(a, b, phi_l, phi_b).unwrap();
            let state = random_state(&mut rng);
            let out = apply_channel(&state, &ops).unwrap();
            let (m1, m03, m12) = analytic_multipliers(a, b).unwrap();
            for i in 0..4 {
                assert_abs_diff_eq!(out.entry(i, i).re, state.entry(i, i).re, epsilon = 1e-14);
                assert_abs_diff_eq!(out.entry(i, i).im, 0.0, epsilon = 1e-14);
            }
            for (i, j, m) in [
                (0usize, 1usize, m1),
                (0, 2, m1),
                (1, 3, m1),
                (2, 3, m1),
                (0, 3, m03),
                (1, 2, m12),
            ] {
                let got = out.entry(i, j).norm();
                let want = m * state.entry(i, j).norm();
                assert_abs_diff_eq!(got, want, epsilon = 1e-12);
            }
            // phases: rho'_01 = a b e^{-i phi_loc} rho_01
            let expect01 = state.entry(0, 1) * m1 * C64::new(phi_l.cos(), -phi_l.sin());
            assert_abs_diff_eq!((out.entry(0, 1) - expect01).norm(), 0.0, epsilon = 1e-12);
            let expect03 = state.entry(0, 3) * m03 * C64::new(phi_b.cos(), -phi_b.sin());
            assert_abs_diff_eq!((out.entry(0, 3) - expect03).norm(), 0.0, epsilon = 1e-12);
            // the singlet coherence picks up no phase at all
            let expect12 = state.entry(1, 2) * m12;
            assert_abs_diff_eq!((out.entry(1, 2) - expect12).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn unitary_and_kraus_order_commute() {
        // all operators are diagonal, so K(U rho U')K' = U(K rho K')U'
        let ops = build_channel(0.7, 0.85, 0.4, -1.1).unwrap();
        let mut rng = StdRng::seed_from_u64(31);
        let state = random_state(&mut rng);
        let mut pre = CMat::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                *pre.at_mut(i, j) =
                    ops.unitary_diag[i] * state.entry(i, j) * ops.unitary_diag[j].conj();
            }
        }
        let swapped = apply_raw(
            &pre,
            &ChannelOps { kraus: ops.kraus, unitary_diag: [C64::new(1.0, 0.0); 4] },
        );
        let direct = apply_raw(state.rho(), &ops);
        for i in 0..4 {
            for j in 0..4 {
                assert_abs_diff_eq!((swapped.at(i, j) - direct.at(i, j)).norm(), 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn choi_matrix_is_positive_and_trace_preserving() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..25 {
            let a = rng.gen_range(0.05..=1.0_f64);
            let b = rng.gen_range(0.05..=1.0_f64);
            let ops = build_channel(a, b, rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)).unwrap();
            let choi = choi_matrix(&ops);
            assert!(choi_min_eigenvalue(&choi) >= PSD_FLOOR);
            let pt = choi_partial_trace(&choi);
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!((pt.at(i, j) - C64::new(want, 0.0)).norm(), 0.0, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn identity_choi_is_the_maximally_entangled_projector() {
        let ops = build_channel(1.0, 1.0, 0.0, 0.0).unwrap();
        let choi = choi_matrix(&ops);
        for r in 0..16 {
            for c in 0..16 {
                let want = if r % 5 == 0 && c % 5 == 0 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!((choi.at(r, c) - C64::new(want, 0.0)).norm(), 0.0, epsilon = 1e-14);
            }
        }
        // rank-one with eigenvalue 4 = projector onto the maximally
        // entangled vector times the dimension
        let (eigs, _) = hermitian_eigen(&choi);
        assert_relative_eq!(eigs[15], 4.0, max_relative = 1e-12);
        assert_abs_diff_eq!(eigs[14], 0.0, epsilon = 1e-12);
    }
}

//! Small dense complex-matrix helpers and a Hermitian Jacobi eigensolver.
//!
//! Everything here serves 4x4 states and the 16x16 Choi matrix; the few-mode
//! oracle keeps its own solver for the much larger bath blocks. Cyclic Jacobi
//! is slow asymptotically but at these sizes it is simple, allocation-light
//! and accurate to machine precision.

use num_complex::Complex64 as C64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }

    pub fn mul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += aik * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// (A + A†)/2, discarding the anti-Hermitian round-off residue.
    pub fn hermitize(&self) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let z = 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj());
                out.data[i * n + j] = z;
            }
        }
        out
    }

    /// Largest |a_ij| deviation from Hermiticity.
    pub fn hermiticity_residue(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let r = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching unitary whose
/// columns are the eigenvectors, so `A = V diag(w) V†`. The caller must pass
/// a Hermitian matrix; the strict lower triangle is taken as the conjugate of
/// the upper one.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.n;
    let mut m = a.hermitize();
    let mut v = CMat::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);
    let target = (1e-15 * scale) * (1e-15 * scale);

    for _sweep in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m.at(i, j).norm_sqr();
            }
        }
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.at(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let tau = (m.at(q, q).re - m.at(p, p).re) / (2.0 * r);
                let sgn = if tau >= 0.0 { 1.0 } else { -1.0 };
                let t = -1.0 / (tau + sgn * (tau * tau + 1.0).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = (t * c) * phase.conj(); // U = [[c, -s̄],[s, c]] on (p,q)

                for i in 0..n {
                    let aip = m.at(i, p);
                    let aiq = m.at(i, q);
                    *m.at_mut(i, p) = c * aip + s * aiq;
                    *m.at_mut(i, q) = -s.conj() * aip + c * aiq;
                }
                for j in 0..n {
                    let apj = m.at(p, j);
                    let aqj = m.at(q, j);
                    *m.at_mut(p, j) = c * apj + s.conj() * aqj;
                    *m.at_mut(q, j) = -s * apj + c * aqj;
                }
                for i in 0..n {
                    let vip = v.at(i, p);
                    let viq = v.at(i, q);
                    *v.at_mut(i, p) = c * vip + s * viq;
                    *v.at_mut(i, q) = -s.conj() * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let eigs: Vec<f64> = (0..n).map(|i| m.at(i, i).re).collect();
    order.sort_by(|&i, &j| eigs[i].partial_cmp(&eigs[j]).unwrap());

    let sorted: Vec<f64> = order.iter().map(|&i| eigs[i]).collect();
    let mut vs = CMat::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            *vs.at_mut(i, col) = v.at(i, src);
        }
    }
    (sorted, vs)
}

//! Time- and temperature-dependent dephasing kernels evaluated from a
//! spectral table.
//!
//! The two coherence amplitudes are a(t) = exp(-Gamma_plus) and
//! b(t) = exp(-Gamma_minus) with
//!
//! `Gamma(t, T) = Int S(omega) coth(hbar omega / 2 k_B T) (1 - cos omega t) domega`.
//!
//! The phase functions multiply the diagonal unitary: phi_loc on the singly
//! excited states and phi_bi (plus the trivial -delta_e * t shift) on the
//! doubly excited one. Both are thermal-factor-free sine transforms of the
//! densities, so they relax to zero at long times while the exponents
//! saturate at finite asymptotes: dephasing here is only ever partial.
//!
//! All integrals run over the uniform table grid with Filon-type
//! quadrature, which keeps the error independent of how many oscillations
//! of cos(omega t) fit in the integration range. Zero time is exact by
//! construction: Gamma(0) evaluates as the difference of two identical
//! quadratures, giving a(0) = b(0) = 1 bitwise.

use crate::error::{Error, Result};
use crate::params::{HBAR, K_B};
use crate::quad;
use crate::spectral::SpectralTable;

/// Which spectral branch an exponent integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

/// Kernel quantities at one (t, T) point. `phi_bi` excludes the
/// `-delta_e * t` contribution, which depends on neither table nor bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    /// Time, ps.
    pub t: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Symmetric-branch amplitude in (0, 1].
    pub a: f64,
    /// Antisymmetric-branch amplitude in (0, 1].
    pub b: f64,
    /// Phase on the singly excited states, rad.
    pub phi_loc: f64,
    /// Bath part of the phase on the doubly excited state, rad.
    pub phi_bi: f64,
    /// Long-time limit of a.
    pub a_inf: f64,
    /// Long-time limit of b.
    pub b_inf: f64,
}

/// coth(hbar omega / (2 k_B T)); exactly 1 at T = 0 (empty bath).
pub fn thermal_factor(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::invalid("omega", "frequency must be finite and positive"));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::invalid("temperature", "must be finite and non-negative"));
    }
    if temperature == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 / (HBAR * omega / (2.0 * K_B * temperature)).tanh())
}

/// Precomputed thermally weighted integrand arrays for one temperature.
///
/// Building the workspace costs one pass over the table; every kernel
/// evaluation afterwards is a single Filon quadrature. Time series should
/// construct one workspace and reuse it.
#[derive(Debug, Clone)]
pub struct KernelWorkspace<'a> {
    table: &'a SpectralTable,
    temperature: f64,
    /// S_plus * coth on the grid; index 0 holds the exact omega -> 0 limit.
    f_plus: Vec<f64>,
    /// S_minus * coth; vanishes like omega^2 at the origin.
    f_minus: Vec<f64>,
    /// S_plus + S_minus, the phase integrand (no thermal weight).
    s_sum: Vec<f64>,
}

impl<'a> KernelWorkspace<'a> {
    pub fn new(table: &'a SpectralTable, temperature: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(Error::invalid("temperature", "must be finite and non-negative"));
        }
        let n = table.len();
        if n < 3 || n % 2 == 0 {
            return Err(Error::invalid("table", "grid must have an odd point count >= 3"));
        }
        let mut f_plus = Vec::with_capacity(n);
        let mut f_minus = Vec::with_capacity(n);
        // S_plus is linear at the origin while coth diverges as 1/omega, so
        // the product has the finite limit slope * 2 k_B T / hbar; S_minus
        // is cubic and its weighted value vanishes.
        f_plus.push(if temperature > 0.0 {
            table.slope0_plus * 2.0 * K_B * temperature / HBAR
        } else {
            0.0
        });
        f_minus.push(0.0);
        for j in 1..n {
            let w = thermal_factor(table.omega[j], temperature)?;
            f_plus.push(table.s_plus[j] * w);
            f_minus.push(table.s_minus[j] * w);
        }
        let s_sum = table
            .s_plus
            .iter()
            .zip(&table.s_minus)
            .map(|(&p, &m)| p + m)
            .collect();
        Ok(Self { table, temperature, f_plus, f_minus, s_sum })
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn table(&self) -> &'a SpectralTable {
        self.table
    }

    /// Times are valid up to a small grace factor beyond the horizon the
    /// grid was built for; beyond that the Filon interpolant undersamples
    /// the oscillation and results silently degrade, so refuse instead.
    fn check_time(&self, t: f64) -> Result<()> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid("t", "time must be finite and non-negative"));
        }
        if t > 1.05 * self.table.t_max {
            return Err(Error::invalid(
                "t",
                format!(
                    "t = {t} ps exceeds the table horizon {} ps; rebuild the table with a larger horizon",
                    self.table.t_max
                ),
            ));
        }
        Ok(())
    }

    pub fn decoherence_exponent(&self, branch: Branch, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let f = match branch {
            Branch::Plus => &self.f_plus,
            Branch::Minus => &self.f_minus,
        };
        let h = self.table.step();
        let total = quad::filon_cos(f, h, 0.0);
        let oscillatory = quad::filon_cos(f, h, t);
        Ok((total - oscillatory).max(0.0))
    }

    pub fn amplitudes(&self, t: f64) -> Result<(f64, f64)> {
        let gp = self.decoherence_exponent(Branch::Plus, t)?;
        let gm = self.decoherence_exponent(Branch::Minus, t)?;
        Ok(((-gp).exp(), (-gm).exp()))
    }

    /// `(phi_loc, phi_bi_total)` with the `-delta_e * t` term included in
    /// the second component. Both bath contributions are temperature-free.
    pub fn phases(&self, t: f64, delta_e: f64) -> Result<(f64, f64)> {
        self.check_time(t)?;
        if !delta_e.is_finite() {
            return Err(Error::invalid("delta_e", "must be finite"));
        }
        let h = self.table.step();
        let phi_loc = quad::filon_sin(&self.s_sum, h, t);
        let phi_bi4 = 4.0 * quad::filon_sin(&self.table.s_plus, h, t);
        Ok((phi_loc, phi_bi4 - delta_e * t))
    }

    /// Long-time amplitudes from the non-oscillatory part of the exponent
    /// alone; exact, no large-t evaluation involved.
    pub fn asymptotic_amplitudes(&self) -> (f64, f64) {
        let h = self.table.step();
        let gp = quad::filon_cos(&self.f_plus, h, 0.0);
        let gm = quad::filon_cos(&self.f_minus, h, 0.0);
        ((-gp).exp(), (-gm).exp())
    }

    pub fn evaluate(&self, t: f64) -> Result<KernelEval> {
        let (a, b) = self.amplitudes(t)?;
        let (phi_loc, phi_bi) = self.phases(t, 0.0)?;
        let (a_inf, b_inf) = self.asymptotic_amplitudes();
        Ok(KernelEval {
            t,
            temperature: self.temperature,
            a,
            b,
            phi_loc,
            phi_bi,
            a_inf,
            b_inf,
        })
    }
}

/// One-shot exponent; builds a temporary workspace. Prefer
/// [`KernelWorkspace`] for time series.
pub fn decoherence_exponent(
    table: &SpectralTable,
    branch: Branch,
    t: f64,
    temperature: f64,
) -> Result<f64> {
    KernelWorkspace::new(table, temperature)?.decoherence_exponent(branch, t)
}

/// One-shot `(a, b)` at a single time.
pub fn amplitudes(table: &SpectralTable, t: f64, temperature: f64) -> Result<(f64, f64)> {
    KernelWorkspace::new(table, temperature)?.amplitudes(t)
}

/// One-shot `(phi_loc, phi_bi_total)`; temperature-independent.
pub fn phases(table: &SpectralTable, t: f64, delta_e: f64) -> Result<(f64, f64)> {
    KernelWorkspace::new(table, 0.0)?.phases(t, delta_e)
}

/// One-shot `(a_inf, b_inf)`.
pub fn asymptotic_amplitudes(table: &SpectralTable, temperature: f64) -> Result<(f64, f64)> {
    Ok(KernelWorkspace::new(table, temperature)?.asymptotic_amplitudes())
}

/// Full kernel snapshot at one (t, T).
pub fn evaluate(table: &SpectralTable, t: f64, temperature: f64) -> Result<KernelEval> {
    KernelWorkspace::new(table, temperature)?.evaluate(t)
}

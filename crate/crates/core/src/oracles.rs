//! Independent verification machinery, deliberately built on different
//! mathematics than the production pipeline.
//!
//! Two oracles live here. [`mc_exponent`] estimates the decoherence
//! exponents by importance-sampled Monte Carlo over the raw 3D wavevector
//! integral, never touching the one-dimensional spectral reduction. The
//! few-mode oracle evolves the full qubit-pair-plus-bosons Hamiltonian
//! exactly on a truncated Fock space: the Hamiltonian is block diagonal in
//! the qubit basis, so each of the four blocks is a set of displaced
//! oscillators that a Hermitian eigendecomposition integrates without any
//! channel formulas. Neither path is ever used by production outputs.

use crate::channel::{build_channel, ChannelOps, TwoQubitState};
use crate::error::{Error, Result};
use crate::kernel::thermal_factor;
use crate::linalg::CMat;
use crate::params::{DotGeometry, MaterialParams, HBAR, K_B};
use crate::spectral::reduced_coupling;
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of a Monte-Carlo integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub value: f64,
    /// Standard error of the mean; zero only when every sample agrees.
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Whether the estimate is consistent with a reference value within
    /// the larger of three standard errors and 1% relative.
    pub fn agrees_with(&self, reference: f64) -> bool {
        let tol = (3.0 * self.std_error).max(0.01 * reference.abs());
        (self.value - reference).abs() <= tol
    }
}

/// Deterministic per-point seed for sweep-style workloads: mixes the base
/// seed with the point index so points stay independent but reproducible.
pub fn derive_point_seed(base_seed: u64, index: usize) -> u64 {
    // splitmix64 step
    let mut z = base_seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard-normal sampler (Box-Muller with a cached spare), deterministic
/// for a fixed generator state.
struct NormalSource {
    spare: Option<f64>,
}

impl NormalSource {
    fn new() -> Self {
        NormalSource { spare: None }
    }

    fn sample(&mut self, rng: &mut ChaCha8Rng) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = std::f64::consts::TAU * u2;
        self.spare = Some(r * phi.sin());
        r * phi.cos()
    }
}

/// Running mean and variance (Welford).
#[derive(Clone, Copy)]
struct Accumulator {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn new() -> Self {
        Accumulator { n: 0, mean: 0.0, m2: 0.0 }
    }

    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn finish(&self, seed: u64) -> McEstimate {
        let std_error = if self.n > 1 {
            (self.m2 / (self.n as f64 * (self.n - 1) as f64)).sqrt()
        } else {
            0.0
        };
        McEstimate { value: self.mean, std_error, n_samples: self.n, seed }
    }
}

/// Monte-Carlo estimate of both decoherence exponents at time `t` by
/// importance sampling the raw 3D wavevector integral with a Gaussian
/// proposal matched to the form-factor envelope. Returns the symmetric
/// and antisymmetric estimates drawn from one shared sample stream.
pub fn mc_exponent(
    t: f64,
    temperature: f64,
    material: &MaterialParams,
    geometry: &DotGeometry,
    n_samples: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    material.validate()?;
    geometry.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", "time must be finite and non-negative"));
    }
    if !(temperature.is_finite() && temperature >= 0.0) {
        return Err(Error::invalid("temperature", "temperature must be finite and non-negative"));
    }
    if n_samples < 10_000 {
        return Err(Error::invalid("n_samples", "need at least 10000 samples"));
    }
    // proposal widths track the narrowest form factors in each direction
    let s_xy = 2.0 / geometry.l_h.min(geometry.l_e);
    let s_z = 2.0 / geometry.l_z;
    if !(s_xy.is_finite() && s_xy > 0.0 && s_z.is_finite() && s_z > 0.0) {
        return Err(Error::DegenerateProposal(format!(
            "proposal widths {s_xy}, {s_z} are not positive and finite"
        )));
    }
    let c = material.sound_speed;
    let norm = 1.0 / ((std::f64::consts::TAU * s_xy * s_xy)
        * (std::f64::consts::TAU * s_z * s_z).sqrt());
    let cube = 1.0 / (std::f64::consts::TAU.powi(3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = NormalSource::new();
    let mut acc_plus = Accumulator::new();
    let mut acc_minus = Accumulator::new();
    for _ in 0..n_samples {
        let kx = s_xy * normal.sample(&mut rng);
        let ky = s_xy * normal.sample(&mut rng);
        let kz = s_z * normal.sample(&mut rng);
        let kk = (kx * kx + ky * ky + kz * kz).sqrt();
        let u = (kz / kk).clamp(-1.0, 1.0);
        let omega = c * kk;
        let envelope = reduced_coupling(kk, u, material, geometry)?;
        let pdf = norm
            * (-(kx * kx + ky * ky) / (2.0 * s_xy * s_xy) - kz * kz / (2.0 * s_z * s_z)).exp();
        let common = cube * envelope * (1.0 - (omega * t).cos()) * thermal_factor(omega, temperature)?
            / pdf;
        let half = 0.5 * kz * geometry.d;
        let (sin_h, cos_h) = half.sin_cos();
        acc_plus.push(common * cos_h * cos_h);
        acc_minus.push(common * sin_h * sin_h);
    }
    Ok((acc_plus.finish(seed), acc_minus.finish(seed)))
}

/// One discrete bath mode with its coupling to each qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FewMode {
    /// Mode frequency in 1/ps.
    pub omega: f64,
    /// Coupling to the first qubit, in 1/ps.
    pub g1: C64,
    /// Coupling to the second qubit, in 1/ps.
    pub g2: C64,
}

/// A finite-mode instance of the qubit-pair-plus-bosons Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct FewModeSpec {
    pub modes: Vec<FewMode>,
    /// Largest kept occupation number per mode.
    pub fock_cutoff: usize,
    /// Bath temperature in K.
    pub temperature: f64,
}

/// Largest total Hilbert dimension (4 qubit states times bath states) the
/// oracle accepts.
pub const FEW_MODE_DIM_LIMIT: usize = 40_000;

/// Largest tolerated thermal weight outside the kept Fock ladder.
pub const FEW_MODE_TAIL_LIMIT: f64 = 1e-6;

impl FewModeSpec {
    pub fn validate(&self) -> Result<()> {
        for (k, mode) in self.modes.iter().enumerate() {
            if !(mode.omega.is_finite() && mode.omega > 0.0) {
                return Err(Error::invalid("modes", format!("mode #{k} frequency must be positive")));
            }
            if !(mode.g1.re.is_finite()
                && mode.g1.im.is_finite()
                && mode.g2.re.is_finite()
                && mode.g2.im.is_finite())
            {
                return Err(Error::invalid("modes", format!("mode #{k} couplings must be finite")));
            }
        }
        if self.fock_cutoff < 2 {
            return Err(Error::invalid("fock_cutoff", "need at least two excitations per mode"));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::invalid("temperature", "temperature must be finite and non-negative"));
        }
        let per_mode = self.fock_cutoff + 1;
        let mut bath_dim: usize = 1;
        for _ in &self.modes {
            bath_dim = bath_dim
                .checked_mul(per_mode)
                .filter(|&n| 4 * n <= FEW_MODE_DIM_LIMIT)
                .ok_or_else(|| {
                    Error::invalid("fock_cutoff", format!("total Hilbert dimension exceeds {FEW_MODE_DIM_LIMIT}"))
                })?;
        }
        Ok(())
    }

    /// Boltzmann ratio exp(-hbar omega / kB T) of one mode.
    fn boltzmann_x(&self, omega: f64) -> f64 {
        if self.temperature == 0.0 {
            0.0
        } else {
            (-HBAR * omega / (K_B * self.temperature)).exp()
        }
    }

    /// Thermal weight left outside the kept ladder, summed over modes as
    /// 1 - prod(kept fraction).
    pub fn thermal_tail_mass(&self) -> f64 {
        let mut kept = 1.0;
        for mode in &self.modes {
            let x = self.boltzmann_x(mode.omega);
            kept *= 1.0 - x.powi(self.fock_cutoff as i32 + 1);
        }
        1.0 - kept
    }

    /// A pair of equal-frequency modes with couplings f e^{+i theta} /
    /// f e^{-i theta} and the mirrored signs, the discrete analogue of a
    /// propagating mode seen by two emitters at separation d (theta is the
    /// half phase k_z d / 2). The mirrored partner keeps the mode set
    /// reflection balanced.
    pub fn symmetric_pair(omega: f64, f: f64, theta: f64) -> [FewMode; 2] {
        let g = |th: f64| C64::new(f * th.cos(), f * th.sin());
        [
            FewMode { omega, g1: g(theta), g2: g(-theta) },
            FewMode { omega, g1: g(-theta), g2: g(theta) },
        ]
    }
}

/// Couplings of the four qubit-basis blocks to one mode: the ground block
/// feels nothing, each singly excited block feels its own qubit's
/// coupling, the doubly excited block feels the sum.
fn block_couplings(mode: &FewMode) -> [C64; 4] {
    let zero = C64::new(0.0, 0.0);
    [zero, mode.g2, mode.g1, mode.g1 + mode.g2]
}

/// Static energy compensation per block: the bath dressing shifts each
/// singly excited level by -|g|^2/omega, which the channel convention
/// absorbs into renormalized transition energies. The doubly excited
/// block is compensated by the sum of the single shifts only, so the
/// bath-induced pair interaction survives as physics.
fn compensation_energies(spec: &FewModeSpec) -> [f64; 4] {
    let mut e1 = 0.0;
    let mut e2 = 0.0;
    for mode in &spec.modes {
        e1 += mode.g2.norm_sqr() / mode.omega;
        e2 += mode.g1.norm_sqr() / mode.omega;
    }
    [0.0, e1, e2, e1 + e2]
}

struct BathBasis {
    dim: usize,
    strides: Vec<usize>,
    per_mode: usize,
}

impl BathBasis {
    fn new(spec: &FewModeSpec) -> Self {
        let per_mode = spec.fock_cutoff + 1;
        let mut strides = Vec::with_capacity(spec.modes.len());
        let mut dim = 1;
        for _ in &spec.modes {
            strides.push(dim);
            dim *= per_mode;
        }
        BathBasis { dim, strides, per_mode }
    }

    fn occupation(&self, index: usize, mode: usize) -> usize {
        index / self.strides[mode] % self.per_mode
    }
}

/// Thermal weights over the kept ladder, normalized within the truncation.
fn thermal_weights(spec: &FewModeSpec, basis: &BathBasis) -> Vec<f64> {
    let mut weights = vec![1.0; basis.dim];
    for (m, mode) in spec.modes.iter().enumerate() {
        let x = spec.boltzmann_x(mode.omega);
        let mut ladder = vec![0.0; basis.per_mode];
        let mut z = 0.0;
        for (n, slot) in ladder.iter_mut().enumerate() {
            *slot = if x == 0.0 {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                x.powi(n as i32)
            };
            z += *slot;
        }
        for w in &mut ladder {
            *w /= z;
        }
        for (idx, w) in weights.iter_mut().enumerate() {
            *w *= ladder[basis.occupation(idx, m)];
        }
    }
    weights
}

/// Propagator matrix elements U[p, q] = <p| exp(-i H t) |q> of one block.
fn block_propagator(
    spec: &FewModeSpec,
    basis: &BathBasis,
    couplings: &[C64],
    energy: f64,
    t: f64,
) -> DMatrix<Complex<f64>> {
    let n = basis.dim;
    let coupled = couplings.iter().any(|g| g.norm_sqr() > 0.0);
    if !coupled {
        // free evolution is diagonal; no eigensolve needed
        let mut u = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
        for idx in 0..n {
            let mut diag = energy;
            for (m, mode) in spec.modes.iter().enumerate() {
                diag += mode.omega * basis.occupation(idx, m) as f64;
            }
            let phase = -diag * t;
            u[(idx, idx)] = Complex::new(phase.cos(), phase.sin());
        }
        return u;
    }
    let mut h = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    for idx in 0..n {
        let mut diag = energy;
        for (m, mode) in spec.modes.iter().enumerate() {
            let occ = basis.occupation(idx, m);
            diag += mode.omega * occ as f64;
            if occ < spec.fock_cutoff {
                // lambda b^dagger raises this mode
                let amp = (occ as f64 + 1.0).sqrt();
                let up = idx + basis.strides[m];
                let lam = couplings[m];
                h[(up, idx)] += Complex::new(lam.re * amp, lam.im * amp);
                h[(idx, up)] += Complex::new(lam.re * amp, -lam.im * amp);
            }
        }
        h[(idx, idx)] += Complex::new(diag, 0.0);
    }
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors;
    let mut scaled = v.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        let phase = -eig.eigenvalues[k] * t;
        let rot = Complex::new(phase.cos(), phase.sin());
        for entry in col.iter_mut() {
            *entry *= rot;
        }
    }
    scaled * v.adjoint()
}

/// Exact reduced state of the qubit pair after evolving the truncated
/// Hamiltonian for time `t` from a product of `initial` with the thermal
/// bath. Fails when the thermal truncation tail exceeds the reporting
/// limit.
pub fn few_mode_evolve(spec: &FewModeSpec, initial: &[C64; 4], t: f64) -> Result<TwoQubitState> {
    spec.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", "time must be finite and non-negative"));
    }
    let norm2: f64 = initial.iter().map(|z| z.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("initial", "qubit state vector must be normalized to 1e-12"));
    }
    let tail = spec.thermal_tail_mass();
    if tail > FEW_MODE_TAIL_LIMIT {
        return Err(Error::CutoffTooSmall { tail, limit: FEW_MODE_TAIL_LIMIT });
    }
    let basis = BathBasis::new(spec);
    let weights = thermal_weights(spec, &basis);
    let energies = compensation_energies(spec);
    let propagators: Vec<DMatrix<Complex<f64>>> = (0..4)
        .map(|block| {
            let couplings: Vec<C64> = spec.modes.iter().map(|m| block_couplings(m)[block]).collect();
            block_propagator(spec, &basis, &couplings, energies[block], t)
        })
        .collect();
    // dephasing factors D_ij = sum_pq w_q conj(U_j[p,q]) U_i[p,q]
    let mut rho = CMat::zeros(4);
    for i in 0..4 {
        for j in 0..4 {
            let mut d = Complex::new(0.0, 0.0);
            for q in 0..basis.dim {
                if weights[q] == 0.0 {
                    continue;
                }
                let mut overlap = Complex::new(0.0, 0.0);
                for p in 0..basis.dim {
                    overlap += propagators[j][(p, q)].conj() * propagators[i][(p, q)];
                }
                d += overlap * weights[q];
            }
            *rho.at_mut(i, j) = initial[i] * initial[j].conj() * C64::new(d.re, d.im);
        }
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > 1e-10 {
        return Err(Error::ConvergenceFailure {
            context: "few-mode reduced state trace",
            achieved: (trace - 1.0).abs(),
            requested: 1e-10,
        });
    }
    let mut balanced = rho.hermitize();
    for i in 0..4 {
        for j in 0..4 {
            *balanced.at_mut(i, j) /= trace;
        }
    }
    TwoQubitState::from_matrix(balanced)
}

/// The dephasing channel predicted for a few-mode spec by the closed-form
/// discrete sums: amplitudes from the symmetric/antisymmetric coupling
/// halves, phases from the same sums plus the surviving bath-induced pair
/// shift. Feeding these into the generic channel must reproduce
/// [`few_mode_evolve`] up to the truncation tail; the comparison validates
/// the channel structure against the raw Hamiltonian.
///
/// The closed forms only collapse to a single (a, b, phases) tuple when
/// every mode couples to both qubits with equal magnitude and the mode set
/// is reflection balanced (each frequency's cross couplings sum to a real
/// number); anything else is rejected.
pub fn few_mode_reference_channel(spec: &FewModeSpec, t: f64) -> Result<ChannelOps> {
    spec.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", "time must be finite and non-negative"));
    }
    let mut imbalance: Vec<(u64, f64, f64)> = Vec::new();
    for (k, mode) in spec.modes.iter().enumerate() {
        let m1 = mode.g1.norm();
        let m2 = mode.g2.norm();
        if (m1 - m2).abs() > 1e-12 * (m1 + m2 + 1.0) {
            return Err(Error::UnsupportedConfiguration(format!(
                "closed-form channel needs equal coupling magnitudes, mode #{k} has |g1| = {m1}, |g2| = {m2}"
            )));
        }
        let cross = mode.g1.conj() * mode.g2;
        let key = mode.omega.to_bits();
        let scale = cross.norm() / (mode.omega * mode.omega);
        match imbalance.iter_mut().find(|(bits, _, _)| *bits == key) {
            Some((_, sum, tot)) => {
                *sum += cross.im / (mode.omega * mode.omega);
                *tot += scale;
            }
            None => imbalance.push((key, cross.im / (mode.omega * mode.omega), scale)),
        }
    }
    for (bits, sum, tot) in &imbalance {
        if sum.abs() > 1e-12 * (tot + 1.0) {
            return Err(Error::UnsupportedConfiguration(format!(
                "closed-form channel needs a reflection-balanced mode set; frequency {} has residual cross phase {sum:e}",
                f64::from_bits(*bits)
            )));
        }
    }
    let mut gamma_sym = 0.0;
    let mut gamma_anti = 0.0;
    let mut phi_loc = 0.0;
    let mut phi_pair = 0.0;
    let mut induced_shift = 0.0;
    for mode in &spec.modes {
        let w2 = mode.omega * mode.omega;
        let gp2 = (mode.g1 + mode.g2).norm_sqr() / 4.0;
        let gm2 = (mode.g1 - mode.g2).norm_sqr() / 4.0;
        let osc = 1.0 - (mode.omega * t).cos();
        let th = thermal_factor(mode.omega, spec.temperature)?;
        gamma_sym += gp2 / w2 * osc * th;
        gamma_anti += gm2 / w2 * osc * th;
        let s = (mode.omega * t).sin();
        phi_loc -= (gp2 + gm2) / w2 * s;
        phi_pair -= 4.0 * gp2 / w2 * s;
        induced_shift += 2.0 * (mode.g1.conj() * mode.g2).re / mode.omega;
    }
    build_channel(
        (-gamma_sym).exp(),
        (-gamma_anti).exp(),
        phi_loc,
        phi_pair + induced_shift * t,
    )
}

//! End-to-end simulations: preset entangled states, time series of the
//! dephasing channel, asymptotic entanglement, root finders for the
//! disentanglement time and the critical temperature, and parameter sweeps.
//!
//! Everything here composes the lower layers (spectral table, kernel
//! workspace, channel, entanglement measures) and owns no physics of its
//! own. Sweep points are independent and run in parallel; output order is
//! always the grid order.

use crate::channel::{apply_channel, build_channel, TwoQubitState};
use crate::entanglement::{concurrence, eof_from_concurrence};
use crate::error::{Error, Result};
use crate::kernel::KernelWorkspace;
use crate::params::{DotGeometry, RunConfig};
use crate::spectral::{build_spectral_table_with_horizon, SpectralTable};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

/// Concurrence at or below this value counts as complete disentanglement.
/// The clamped concurrence is exactly zero inside the separable region, so
/// the margin only absorbs roundoff.
pub const DISENTANGLEMENT_THRESHOLD: f64 = 1e-9;

/// Named initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialState {
    /// (|00> + |01> + |10> - |11>) / 2
    Psi1,
    /// (|01> - |10>) / sqrt(2)
    Psi2,
}

impl std::str::FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "psi1" => Ok(InitialState::Psi1),
            "psi2" => Ok(InitialState::Psi2),
            _ => Err(Error::invalid("state", format!("unknown preset state `{s}`, expected psi1 or psi2"))),
        }
    }
}

/// Unit vector of a preset state.
pub fn preset_vector(which: InitialState) -> [C64; 4] {
    let r = |x: f64| C64::new(x, 0.0);
    match which {
        InitialState::Psi1 => [r(0.5), r(0.5), r(0.5), r(-0.5)],
        InitialState::Psi2 => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [r(0.0), r(s), r(-s), r(0.0)]
        }
    }
}

/// Preset state by name (`psi1` or `psi2`).
pub fn preset_state(name: &str) -> Result<TwoQubitState> {
    let which: InitialState = name.parse()?;
    TwoQubitState::from_pure(&preset_vector(which))
}

/// One time point of an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    /// Time in ps.
    pub t: f64,
    /// Symmetric-branch amplitude at `t`.
    pub a: f64,
    /// Antisymmetric-branch amplitude at `t`.
    pub b: f64,
    pub concurrence: f64,
    pub eof: f64,
    /// Full evolved state, when requested.
    pub state: Option<TwoQubitState>,
}

/// One point of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Swept parameter value: temperature in K or distance in nm.
    pub parameter: f64,
    pub asymptotic_eof: f64,
    /// Disentanglement time in ps, when the state fully disentangles
    /// within the configured horizon.
    pub disentanglement_time: Option<f64>,
}

/// Outcome of one sweep point. Failures do not abort the sweep; callers
/// decide how to surface them.
#[derive(Debug)]
pub struct SweepPoint {
    pub parameter: f64,
    pub outcome: Result<SweepRecord>,
}

/// Sweep axis selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Temperature,
    Distance,
}

/// Uniform time grid 0, t_step, 2 t_step, ... up to t_max (inclusive when
/// t_max is a whole number of steps, to within roundoff).
pub fn time_grid(t_max: f64, t_step: f64) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid("t_max", "horizon must be positive and finite"));
    }
    if !(t_step.is_finite() && t_step > 0.0) {
        return Err(Error::invalid("t_step", "step must be positive and finite"));
    }
    let n = (t_max / t_step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * t_step).collect())
}

/// Uniform parameter grid min, min+step, ... up to max (inclusive to
/// within roundoff).
pub fn linear_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min <= max) {
        return Err(Error::invalid("grid", "bounds must be finite with min <= max"));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid("grid", "step must be positive and finite"));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| min + k as f64 * step).collect())
}

fn geometry_with_distance(config: &RunConfig, d: f64) -> Result<DotGeometry> {
    let mut g = config.geometry();
    g.d = d;
    g.validate()?;
    Ok(g)
}

fn build_table(config: &RunConfig, horizon: f64) -> Result<SpectralTable> {
    build_spectral_table_with_horizon(&config.material()?, &config.geometry(), config.tol, horizon)
}

/// Channel application at one time on a prepared workspace.
fn evolved_state(
    ws: &KernelWorkspace,
    initial: &TwoQubitState,
    t: f64,
    delta_e: f64,
) -> Result<TwoQubitState> {
    let (a, b) = ws.amplitudes(t)?;
    let (phi_loc, phi_bi_total) = ws.phases(t, delta_e)?;
    let ops = build_channel(a, b, phi_loc, phi_bi_total)?;
    apply_channel(initial, &ops)
}

fn concurrence_at(ws: &KernelWorkspace, initial: &TwoQubitState, t: f64, delta_e: f64) -> Result<f64> {
    concurrence(evolved_state(ws, initial, t, delta_e)?.rho())
}

/// Long-time limit of the evolved state: amplitudes at their floors, no
/// coherent phases (the oscillatory parts average away).
fn asymptotic_state(ws: &KernelWorkspace, initial: &TwoQubitState) -> Result<TwoQubitState> {
    let (a_inf, b_inf) = ws.asymptotic_amplitudes();
    let ops = build_channel(a_inf, b_inf, 0.0, 0.0)?;
    apply_channel(initial, &ops)
}

/// Evolve an initial state through the channel at each requested time.
///
/// Times must be non-negative, finite and strictly increasing. Any
/// evaluation failure aborts the series with the offending time in the
/// error context.
pub fn evolve_series(
    initial: &TwoQubitState,
    times: &[f64],
    config: &RunConfig,
) -> Result<Vec<EvolutionRecord>> {
    config.validate()?;
    for (k, &t) in times.iter().enumerate() {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid("times", format!("time #{k} = {t} is not a finite non-negative value")));
        }
        if k > 0 && t <= times[k - 1] {
            return Err(Error::invalid("times", format!("times must be strictly increasing, saw {t} after {}", times[k - 1])));
        }
    }
    let horizon = times.last().copied().unwrap_or(0.0).max(config.t_max);
    let table = build_table(config, horizon)?;
    let ws = KernelWorkspace::new(&table, config.temperature)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let (a, b) = ws.amplitudes(t)?;
        let (phi_loc, phi_bi_total) = ws.phases(t, config.delta_e)?;
        let ops = build_channel(a, b, phi_loc, phi_bi_total)?;
        let state = apply_channel(initial, &ops)?;
        let c = concurrence(state.rho())?;
        out.push(EvolutionRecord {
            t,
            a,
            b,
            concurrence: c,
            eof: eof_from_concurrence(c)?,
            state: Some(state),
        });
    }
    Ok(out)
}

fn require_zero_detuning(config: &RunConfig, what: &str) -> Result<()> {
    if config.delta_e != 0.0 {
        return Err(Error::UnsupportedConfiguration(format!(
            "{what} requires delta_e = 0: with a finite transition-energy mismatch the evolution keeps cycling and no asymptote exists"
        )));
    }
    Ok(())
}

/// Entanglement of formation of the long-time state. Requires zero
/// transition-energy mismatch.
pub fn asymptotic_eof(initial: &TwoQubitState, config: &RunConfig) -> Result<f64> {
    config.validate()?;
    require_zero_detuning(config, "asymptotic entanglement")?;
    let table = build_table(config, config.t_max)?;
    let ws = KernelWorkspace::new(&table, config.temperature)?;
    let c = concurrence(asymptotic_state(&ws, initial)?.rho())?;
    eof_from_concurrence(c)
}

fn disentanglement_time_on(
    ws: &KernelWorkspace,
    initial: &TwoQubitState,
    t_max: f64,
) -> Result<Option<f64>> {
    let thr = DISENTANGLEMENT_THRESHOLD;
    // coarse scan at steps of at most 0.05 ps
    let n_steps = (t_max / 0.05).ceil().max(1.0) as usize;
    let step = t_max / n_steps as f64;
    let mut lo = 0.0;
    let mut hit = None;
    for k in 1..=n_steps {
        let t = k as f64 * step;
        if concurrence_at(ws, initial, t, 0.0)? <= thr {
            hit = Some(t);
            break;
        }
        lo = t;
    }
    let Some(mut hi) = hit else {
        let c_inf = concurrence(asymptotic_state(ws, initial)?.rho())?;
        if c_inf > thr {
            return Ok(None);
        }
        return Err(Error::Inconclusive(format!(
            "concurrence stays above {thr:.0e} up to t_max = {t_max} ps but vanishes asymptotically; rerun with a larger t_max"
        )));
    };
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if concurrence_at(ws, initial, mid, 0.0)? <= thr {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Smallest time in (0, t_max] at which the concurrence falls to the
/// disentanglement threshold, located by a coarse scan and bisection to
/// 1e-3 ps. `None` means the state stays entangled through t_max and in
/// the long-time limit. Requires zero transition-energy mismatch.
pub fn find_disentanglement_time(
    initial: &TwoQubitState,
    config: &RunConfig,
    t_max: f64,
) -> Result<Option<f64>> {
    config.validate()?;
    require_zero_detuning(config, "the disentanglement time")?;
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::invalid("t_max", "search horizon must be positive and finite"));
    }
    let table = build_table(config, t_max.max(config.t_max))?;
    let ws = KernelWorkspace::new(&table, config.temperature)?;
    disentanglement_time_on(&ws, initial, t_max)
}

/// Lowest temperature in `t_range` at which the long-time state is fully
/// disentangled, bisected to 0.1 K on the asymptotic concurrence.
/// `None` when the threshold crossing does not lie inside the range.
pub fn find_critical_temperature(
    initial: &TwoQubitState,
    d: f64,
    config: &RunConfig,
    t_range: (f64, f64),
) -> Result<Option<f64>> {
    config.validate()?;
    require_zero_detuning(config, "the critical temperature")?;
    let (mut t_lo, mut t_hi) = t_range;
    if !(t_lo.is_finite() && t_hi.is_finite() && t_lo >= 0.0 && t_lo < t_hi) {
        return Err(Error::invalid("t_range", "need 0 <= T_lo < T_hi, both finite"));
    }
    let geometry = geometry_with_distance(config, d)?;
    let table =
        build_spectral_table_with_horizon(&config.material()?, &geometry, config.tol, config.t_max)?;
    let c_at = |temperature: f64| -> Result<f64> {
        let ws = KernelWorkspace::new(&table, temperature)?;
        concurrence(asymptotic_state(&ws, initial)?.rho())
    };
    let thr = DISENTANGLEMENT_THRESHOLD;
    let c_lo = c_at(t_lo)?;
    let c_hi = c_at(t_hi)?;
    if c_lo <= thr && c_hi > thr {
        return Err(Error::Inconclusive(format!(
            "asymptotic concurrence rises with temperature over [{t_lo}, {t_hi}] K; expected a monotone decay"
        )));
    }
    if (c_lo > thr) == (c_hi > thr) {
        // fully entangled or fully disentangled across the whole range
        return Ok(None);
    }
    while t_hi - t_lo > 0.1 {
        let mid = 0.5 * (t_lo + t_hi);
        if c_at(mid)? <= thr {
            t_hi = mid;
        } else {
            t_lo = mid;
        }
    }
    Ok(Some(t_hi))
}

fn sweep_point(
    table: &SpectralTable,
    temperature: f64,
    parameter: f64,
    initial: &TwoQubitState,
    t_max: f64,
) -> Result<SweepRecord> {
    let ws = KernelWorkspace::new(table, temperature)?;
    let c_inf = concurrence(asymptotic_state(&ws, initial)?.rho())?;
    Ok(SweepRecord {
        parameter,
        asymptotic_eof: eof_from_concurrence(c_inf)?,
        disentanglement_time: disentanglement_time_on(&ws, initial, t_max)?,
    })
}

/// Sweep the asymptotic entanglement and disentanglement time over a
/// temperature or distance grid. Points run in parallel; the output order
/// is the grid order. A failing point is recorded and the sweep continues.
pub fn sweep(
    axis: SweepAxis,
    grid: &[f64],
    initial: &TwoQubitState,
    config: &RunConfig,
) -> Result<Vec<SweepPoint>> {
    config.validate()?;
    require_zero_detuning(config, "a parameter sweep")?;
    for (k, &v) in grid.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid("grid", format!("grid value #{k} = {v} is not a finite non-negative value")));
        }
        if k > 0 && v <= grid[k - 1] {
            return Err(Error::invalid("grid", format!("grid must be strictly increasing, saw {v} after {}", grid[k - 1])));
        }
    }
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    match axis {
        SweepAxis::Temperature => {
            // one spectral table serves every temperature
            let table = build_table(config, config.t_max)?;
            Ok(grid
                .par_iter()
                .map(|&temperature| SweepPoint {
                    parameter: temperature,
                    outcome: sweep_point(&table, temperature, temperature, initial, config.t_max),
                })
                .collect())
        }
        SweepAxis::Distance => Ok(grid
            .par_iter()
            .map(|&d| {
                let outcome = geometry_with_distance(config, d).and_then(|geometry| {
                    let table = build_spectral_table_with_horizon(
                        &config.material()?,
                        &geometry,
                        config.tol,
                        config.t_max,
                    )?;
                    sweep_point(&table, config.temperature, d, initial, config.t_max)
                });
                SweepPoint { parameter: d, outcome }
            })
            .collect()),
    }
}

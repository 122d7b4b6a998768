//! Physical constants, material and geometry parameters, and the flat
//! `key = value` run configuration.
//!
//! Internal unit system: lengths in nm, times in ps, energies in meV,
//! temperatures in K. In these units hbar = 0.6582119569 meV ps and
//! k_B = 0.08617333262 meV/K. Mass density enters the deformation-potential
//! coupling as energy * time^2 / length^5; config files keep the familiar
//! kg/m^3 and the conversion happens on access, never at parse time, so a
//! loaded config serializes back byte-identically.
//!
//! The bosonic normalization volume cancels between the squared coupling
//! and the continuum mode measure, so no volume parameter exists anywhere
//! in this crate.

use crate::error::{Error, Result};

/// Reduced Planck constant in meV ps.
pub const HBAR: f64 = 0.6582119569;
/// Boltzmann constant in meV per K.
pub const K_B: f64 = 0.08617333262;
/// One kg/m^3 expressed in meV ps^2 / nm^5.
pub const MEV_PS2_NM5_PER_KG_M3: f64 = 6.241509074460763;

/// Constant bundle for display and sanity checks; the numeric code uses the
/// module-level consts directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// hbar in meV ps.
    pub hbar: f64,
    /// k_B in meV/K.
    pub k_b: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self { hbar: HBAR, k_b: K_B }
    }
}

/// Convert a mass density from kg/m^3 to meV ps^2 / nm^5.
pub fn convert_mass_density(kg_per_m3: f64) -> Result<f64> {
    if !(kg_per_m3.is_finite() && kg_per_m3 > 0.0) {
        return Err(Error::invalid("mass_density", "must be finite and positive"));
    }
    Ok(kg_per_m3 * MEV_PS2_NM5_PER_KG_M3)
}

/// Bulk material properties in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Electron deformation potential in meV.
    pub sigma_e: f64,
    /// Hole deformation potential in meV.
    pub sigma_h: f64,
    /// Longitudinal sound speed in nm/ps.
    pub sound_speed: f64,
    /// Mass density in meV ps^2 / nm^5.
    pub mass_density: f64,
}

impl MaterialParams {
    /// GaAs bulk values (deformation potentials in meV, c in nm/ps,
    /// density converted from 5600 kg/m^3).
    pub fn gaas() -> Self {
        Self {
            sigma_e: 8000.0,
            sigma_h: -1000.0,
            sound_speed: 5.6,
            mass_density: 5600.0 * MEV_PS2_NM5_PER_KG_M3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_e", self.sigma_e),
            ("sigma_h", self.sigma_h),
            ("sound_speed", self.sound_speed),
            ("mass_density", self.mass_density),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.sound_speed <= 0.0 {
            return Err(Error::invalid("sound_speed", "must be positive"));
        }
        if self.mass_density <= 0.0 {
            return Err(Error::invalid("mass_density", "must be positive"));
        }
        Ok(())
    }
}

/// Dot geometry: Gaussian wave-function sizes and the inter-dot distance,
/// all in nm. Both dots share the same profile; `l_z` is common to electron
/// and hole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotGeometry {
    /// In-plane electron size.
    pub l_e: f64,
    /// In-plane hole size.
    pub l_h: f64,
    /// Growth-direction size, shared by electron and hole.
    pub l_z: f64,
    /// Center-to-center dot separation along the growth axis.
    pub d: f64,
}

impl DotGeometry {
    /// Reference stacked-dot geometry at separation `d`.
    pub fn default_stack(d: f64) -> Self {
        Self { l_e: 4.4, l_h: 3.6, l_z: 1.0, d }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("l_e", self.l_e), ("l_h", self.l_h), ("l_z", self.l_z)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be finite and positive"));
            }
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::invalid("d", "must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Full run configuration in config-file units (mass density in kg/m^3,
/// everything else already in internal units).
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sigma_e: f64,
    pub sigma_h: f64,
    pub sound_speed: f64,
    /// kg/m^3 as written in the config; see [`RunConfig::material`].
    pub mass_density: f64,
    pub l_e: f64,
    pub l_h: f64,
    pub l_z: f64,
    pub d: f64,
    /// Temperature in K.
    pub temperature: f64,
    /// Biexcitonic energy shift expressed as a frequency in 1/ps.
    pub delta_e: f64,
    /// Time-series horizon in ps.
    pub t_max: f64,
    /// Time-series output step in ps.
    pub t_step: f64,
    pub temp_min: f64,
    pub temp_max: f64,
    pub temp_step: f64,
    pub dist_min: f64,
    pub dist_max: f64,
    pub dist_step: f64,
    /// Relative tolerance for table construction and integral convergence.
    pub tol: f64,
    /// Seed for stochastic cross-checks.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sigma_e: 8000.0,
            sigma_h: -1000.0,
            sound_speed: 5.6,
            mass_density: 5600.0,
            l_e: 4.4,
            l_h: 3.6,
            l_z: 1.0,
            d: 6.0,
            temperature: 40.0,
            delta_e: 0.0,
            t_max: 20.0,
            t_step: 0.05,
            temp_min: 0.0,
            temp_max: 300.0,
            temp_step: 5.0,
            dist_min: 0.0,
            dist_max: 30.0,
            dist_step: 1.0,
            tol: 1e-8,
            seed: 20260401,
        }
    }
}

impl RunConfig {
    /// Material block in internal units (density converted from kg/m^3).
    pub fn material(&self) -> Result<MaterialParams> {
        let m = MaterialParams {
            sigma_e: self.sigma_e,
            sigma_h: self.sigma_h,
            sound_speed: self.sound_speed,
            mass_density: convert_mass_density(self.mass_density)?,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn geometry(&self) -> DotGeometry {
        DotGeometry { l_e: self.l_e, l_h: self.l_h, l_z: self.l_z, d: self.d }
    }

    pub fn validate(&self) -> Result<()> {
        self.material()?;
        self.geometry().validate()?;
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::invalid("temperature", "must be finite and non-negative"));
        }
        if !self.delta_e.is_finite() {
            return Err(Error::invalid("delta_e", "must be finite"));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::invalid("t_max", "must be finite and positive"));
        }
        if !(self.t_step.is_finite() && self.t_step > 0.0) {
            return Err(Error::invalid("t_step", "must be finite and positive"));
        }
        for (min_name, max_name, step_name, lo, hi, step) in [
            ("temp_min", "temp_max", "temp_step", self.temp_min, self.temp_max, self.temp_step),
            ("dist_min", "dist_max", "dist_step", self.dist_min, self.dist_max, self.dist_step),
        ] {
            if !(lo.is_finite() && lo >= 0.0) {
                return Err(Error::invalid(min_name, "must be finite and non-negative"));
            }
            if !(hi.is_finite() && hi >= lo) {
                return Err(Error::invalid(max_name, "must be finite and >= the range start"));
            }
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::invalid(step_name, "must be finite and positive"));
            }
        }
        if !(self.tol.is_finite() && self.tol >= 1e-14 && self.tol <= 1e-2) {
            return Err(Error::invalid("tol", "must lie in [1e-14, 1e-2]"));
        }
        Ok(())
    }

    /// Serialize as `key = value` lines in a fixed order. Parsing the output
    /// reproduces the config exactly (f64 default formatting round-trips).
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s.push_str(&format!("seed = {}\n", self.seed));
        s
    }

    fn fields(&self) -> [(&'static str, f64); 19] {
        [
            ("sigma_e", self.sigma_e),
            ("sigma_h", self.sigma_h),
            ("sound_speed", self.sound_speed),
            ("mass_density", self.mass_density),
            ("l_e", self.l_e),
            ("l_h", self.l_h),
            ("l_z", self.l_z),
            ("d", self.d),
            ("temperature", self.temperature),
            ("delta_e", self.delta_e),
            ("t_max", self.t_max),
            ("t_step", self.t_step),
            ("temp_min", self.temp_min),
            ("temp_max", self.temp_max),
            ("temp_step", self.temp_step),
            ("dist_min", self.dist_min),
            ("dist_max", self.dist_max),
            ("dist_step", self.dist_step),
            ("tol", self.tol),
        ]
    }
}

/// Parse a flat `key = value` config. `#` starts a comment anywhere on a
/// line; blank lines are skipped; keys not in [`RunConfig`] are rejected so
/// typos fail loudly instead of silently keeping a default.
pub fn load_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::ConfigParse {
                line,
                reason: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = || -> Result<f64> {
            value.parse::<f64>().map_err(|_| Error::ConfigParse {
                line,
                reason: format!("`{key}` needs a number, got `{value}`"),
            })
        };
        match key {
            "sigma_e" => cfg.sigma_e = parse_f64()?,
            "sigma_h" => cfg.sigma_h = parse_f64()?,
            "sound_speed" => cfg.sound_speed = parse_f64()?,
            "mass_density" => cfg.mass_density = parse_f64()?,
            "l_e" => cfg.l_e = parse_f64()?,
            "l_h" => cfg.l_h = parse_f64()?,
            "l_z" => cfg.l_z = parse_f64()?,
            "d" => cfg.d = parse_f64()?,
            "temperature" => cfg.temperature = parse_f64()?,
            "delta_e" => cfg.delta_e = parse_f64()?,
            "t_max" => cfg.t_max = parse_f64()?,
            "t_step" => cfg.t_step = parse_f64()?,
            "temp_min" => cfg.temp_min = parse_f64()?,
            "temp_max" => cfg.temp_max = parse_f64()?,
            "temp_step" => cfg.temp_step = parse_f64()?,
            "dist_min" => cfg.dist_min = parse_f64()?,
            "dist_max" => cfg.dist_max = parse_f64()?,
            "dist_step" => cfg.dist_step = parse_f64()?,
            "tol" => cfg.tol = parse_f64()?,
            "seed" => {
                cfg.seed = value.parse::<u64>().map_err(|_| Error::ConfigParse {
                    line,
                    reason: format!("`seed` needs a non-negative integer, got `{value}`"),
                })?;
            }
            _ => {
                return Err(Error::ConfigParse {
                    line,
                    reason: format!("unknown key `{key}`"),
                });
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config_file(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    load_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn density_conversion_matches_si_reference() {
        // 5600 kg/m^3, checked against an independent unit reduction
        let rho = convert_mass_density(5600.0).unwrap();
        assert_relative_eq!(rho, 34952.4508169803, max_relative = 1e-12);
        assert!(convert_mass_density(-1.0).is_err());
        assert!(convert_mass_density(f64::NAN).is_err());
    }

    #[test]
    fn constants_are_codata_values() {
        let c = PhysicalConstants::default();
        assert_relative_eq!(c.hbar, 0.6582119569, max_relative = 1e-3);
        assert_relative_eq!(c.k_b, 0.08617333262, max_relative = 1e-3);
        // hbar / k_B in K ps, a handy cross-check of the pair
        assert_relative_eq!(c.hbar / c.k_b, 7.6382325, max_relative = 1e-6);
    }

    #[test]
    fn default_config_is_valid_reference_setup() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let m = cfg.material().unwrap();
        assert_eq!(m.sigma_e, 8000.0);
        assert_eq!(m.sigma_h, -1000.0);
        assert_eq!(m.sound_speed, 5.6);
        let g = cfg.geometry();
        assert_eq!((g.l_e, g.l_h, g.l_z, g.d), (4.4, 3.6, 1.0, 6.0));
        assert_eq!(cfg.temperature, 40.0);
        assert_eq!((cfg.t_max, cfg.t_step), (20.0, 0.05));
    }

    #[test]
    fn config_round_trips_exactly() {
        let mut cfg = RunConfig::default();
        cfg.d = 12.5;
        cfg.temperature = 77.3;
        cfg.mass_density = 5317.9;
        cfg.delta_e = -0.25;
        cfg.seed = 99;
        let text = cfg.to_config_string();
        let back = load_config(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn parser_reports_unknown_keys_and_bad_values() {
        let err = load_config("d = 6\nfoo = 1\n").unwrap_err();
        match err {
            Error::ConfigParse { line, reason } => {
                assert_eq!(line, 2);
                assert!(reason.contains("foo"), "{reason}");
            }
            other => panic!("wrong error: {other}"),
        }
        let err = load_config("temperature = warm\n").unwrap_err();
        match err {
            Error::ConfigParse { line, reason } => {
                assert_eq!(line, 1);
                assert!(reason.contains("temperature"), "{reason}");
            }
            other => panic!("wrong error: {other}"),
        }
        // invariant violations surface from load_config and name the key
        let err = load_config("d = -1\n").unwrap_err();
        assert!(err.to_string().contains('d'), "{err}");
    }

    #[test]
    fn parser_strips_comments_and_blank_lines() {
        let cfg = load_config("# full line comment\n\n d = 8.0 # trailing\n").unwrap();
        assert_eq!(cfg.d, 8.0);
        assert_eq!(cfg.temperature, RunConfig::default().temperature);
    }

    #[test]
    fn validation_rejects_out_of_domain_values() {
        let mut cfg = RunConfig::default();
        cfg.temperature = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.l_e = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.tol = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.temp_max = -5.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.t_step = 0.0;
        assert!(cfg.validate().is_err());
    }
}

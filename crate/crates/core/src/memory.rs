//! Dimensionless coupling strength ℛ of an off-resonant Raman memory.
//!
//! ℛ = √(π²h/(ε₀²c)) · √(n·E_C) · (R·Δ)/(L·Δ), where L is the control
//! wavelength in bulk or d²/L for a waveguide of cross-section d² and
//! length L. Everything here is SI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhysicalConstants;

pub const PLANCK: f64 = 6.62607015e-34;
pub const EPSILON_0: f64 = 8.8541878128e-12;
pub const SPEED_OF_LIGHT: f64 = 2.99792458e8;

/// 1 GHz²·µm²/V² expressed in Hz²·m²/V².
pub const GHZ2_UM2_TO_SI: f64 = 1e6;

/// Convert an R·Δ product from GHz²·µm²/V² to Hz²·m²/V².
pub fn r_times_delta_to_si(ghz2_um2_per_v2: f64) -> f64 {
    ghz2_um2_per_v2 * GHZ2_UM2_TO_SI
}

/// Control wavelength (m) at the zero-phonon line.
pub fn zpl_wavelength(consts: &PhysicalConstants) -> f64 {
    SPEED_OF_LIGHT / (consts.eps_es * 1e12)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Geometry {
    Bulk { wavelength: f64 },
    Waveguide { width: f64, length: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MemoryConfig {
    /// Control pulse energy (J).
    pub pulse_energy: f64,
    /// NV density (m⁻³).
    pub nv_density: f64,
    /// Detuning (Hz).
    pub detuning: f64,
    /// R·Δ (Hz²·m²/V²).
    pub r_times_delta: f64,
    pub geometry: Geometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryStrength {
    pub r: f64,
    /// The length that divides the coupling: wavelength in bulk, d²/L in a
    /// waveguide (m).
    pub effective_length: f64,
    /// Set when a waveguide's d²/L is shorter than the control wavelength it
    /// is compared against, i.e. the guide beats free-space focusing.
    pub waveguide_enhanced: bool,
}

impl MemoryConfig {
    fn validate(&self) -> Result<()> {
        let nonneg = [self.pulse_energy, self.nv_density, self.r_times_delta];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("pulse energy, density and R·Δ must be >= 0".into()));
        }
        if !(self.detuning.is_finite() && self.detuning > 0.0) {
            return Err(Error::InvalidInput("detuning must be > 0".into()));
        }
        let lengths: &[f64] = match &self.geometry {
            Geometry::Bulk { wavelength } => &[*wavelength],
            Geometry::Waveguide { width, length } => &[*width, *length],
        };
        if lengths.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidInput("geometry lengths must be > 0".into()));
        }
        Ok(())
    }
}

/// Evaluate ℛ. `reference_wavelength` is only used to flag waveguides.
pub fn coupling_strength(cfg: &MemoryConfig, reference_wavelength: f64) -> Result<MemoryStrength> {
    cfg.validate()?;
    let (effective_length, waveguide_enhanced) = match cfg.geometry {
        Geometry::Bulk { wavelength } => (wavelength, false),
        Geometry::Waveguide { width, length } => {
            let l = width * width / length;
            (l, l < reference_wavelength)
        }
    };
    let prefactor = (std::f64::consts::PI.powi(2) * PLANCK / (EPSILON_0 * EPSILON_0 * SPEED_OF_LIGHT)).sqrt();
    let r = prefactor * (cfg.nv_density * cfg.pulse_energy).sqrt() * cfg.r_times_delta / (effective_length * cfg.detuning);
    Ok(MemoryStrength { r, effective_length, waveguide_enhanced })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bulk() -> MemoryConfig {
        MemoryConfig {
            pulse_energy: 10e-9,
            nv_density: 1e22,
            detuning: 100e9,
            r_times_delta: r_times_delta_to_si(18.0 / 3f64.sqrt()),
            geometry: Geometry::Bulk { wavelength: zpl_wavelength(&PhysicalConstants::default()) },
        }
    }

    #[test]
    fn conversion_constant() {
        // (1e9 Hz)² (1e-6 m)² = 1e18 · 1e-12
        assert_eq!(GHZ2_UM2_TO_SI, 1e18 * 1e-12);
        assert!((zpl_wavelength(&PhysicalConstants::default()) - 575.0e-9).abs() < 0.2e-9);
    }

    #[test]
    fn bulk_value() {
        let r = coupling_strength(&bulk(), 575e-9).unwrap().r;
        assert!((r - 0.95).abs() < 0.01, "{r}");
    }

    #[test]
    fn zero_energy() {
        let cfg = MemoryConfig { pulse_energy: 0.0, ..bulk() };
        assert_eq!(coupling_strength(&cfg, 575e-9).unwrap().r, 0.0);
        let bad = MemoryConfig { detuning: 0.0, ..bulk() };
        assert!(coupling_strength(&bad, 575e-9).is_err());
    }
}

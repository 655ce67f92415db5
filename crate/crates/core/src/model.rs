//! Physical constants, unit policy and the small value types shared by
//! every other module.
//!
//! Units: ground-manifold energies in GHz, strain coupling energies in THz
//! (converted with [`THZ_TO_GHZ`] when a Hamiltonian is assembled), fields
//! in V/µm and dipoles in GHz·µm/V.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const THZ_TO_GHZ: f64 = 1000.0;

/// Coupling energies, dipoles and strain energies of the model.
///
/// Every field can be overridden from a config file using exactly the key
/// names of the serialized form (`lambda_par`, `eps_A1`, ...). The Boltzmann
/// constant is not a field: it is fixed at [`PhysicalConstants::KB`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalConstants {
    /// Longitudinal spin-orbit coupling (GHz).
    pub lambda_par: f64,
    /// Transverse electric dipole of the ground manifold (GHz·µm/V).
    pub d_perp: f64,
    /// Longitudinal excited-state dipole (GHz·µm/V); neglected by default.
    pub d_par: f64,
    /// Optical transition dipole (GHz·µm/V).
    pub d_ge: f64,
    /// Zero-field excited-state energy (THz).
    pub eps_es: f64,
    #[serde(rename = "eps_A1")]
    pub eps_a1: f64,
    #[serde(rename = "eps_A1_prime")]
    pub eps_a1_prime: f64,
    #[serde(rename = "eps_E")]
    pub eps_e: f64,
    #[serde(rename = "eps_E_prime")]
    pub eps_e_prime: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        PhysicalConstants {
            lambda_par: 4.3,
            d_perp: 5.0,
            d_par: 0.0,
            d_ge: 6.0,
            eps_es: 521.4,
            eps_a1: 192.0,
            eps_a1_prime: -483.0,
            eps_e: -600.0,
            eps_e_prime: 360.0,
        }
    }
}

#[derive(Deserialize)]
struct ConfigFile {
    #[serde(default)]
    constants: Option<toml::Table>,
    #[serde(flatten)]
    top: toml::Table,
}

impl PhysicalConstants {
    /// Boltzmann constant in GHz/K. Not overridable.
    pub const KB: f64 = 20.836619;

    pub fn kb(&self) -> f64 {
        Self::KB
    }

    /// Excited-state energy in GHz.
    pub fn eps_es_ghz(&self) -> f64 {
        self.eps_es * THZ_TO_GHZ
    }

    /// Overlay a TOML document on top of `self`.
    ///
    /// Keys may sit at the top level or inside a `[constants]` table.
    /// Unknown keys and any attempt to set `kB` are rejected.
    pub fn with_overrides(&self, doc: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(doc).map_err(|e| Error::Config(e.to_string()))?;
        let mut merged = match toml::Value::try_from(self) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("constants always serialize to a table"),
        };
        for table in [Some(cfg.top), cfg.constants].into_iter().flatten() {
            for (key, value) in table {
                if key == "kB" || key == "kb" {
                    return Err(Error::Config("kB is fixed and cannot be overridden".into()));
                }
                if !merged.contains_key(&key) {
                    return Err(Error::Config(format!("unknown constant `{key}`")));
                }
                let value = match value {
                    toml::Value::Integer(i) => toml::Value::Float(i as f64),
                    v => v,
                };
                merged.insert(key, value);
            }
        }
        let out: PhysicalConstants = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.lambda_par,
            self.d_perp,
            self.d_par,
            self.d_ge,
            self.eps_es,
            self.eps_a1,
            self.eps_a1_prime,
            self.eps_e,
            self.eps_e_prime,
        ];
        if all.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("constants must be finite".into()))
        }
    }
}

/// cos and sin of an angle in degrees, exact at multiples of 90°.
///
/// Keeping the quarter-turn cases exact means the figure tables do not
/// depend on the platform's libm.
pub fn cos_sin_deg(deg: f64) -> (f64, f64) {
    let q = deg / 90.0;
    if q == q.round() {
        match (q as i64).rem_euclid(4) {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    } else {
        let r = deg.to_radians();
        (r.cos(), r.sin())
    }
}

/// Effective dynamic Jahn-Teller parameters, Υ and α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DjtParams {
    /// Υ in GHz.
    pub upsilon: f64,
    /// α in degrees, normalized into (−180, 180].
    pub alpha: f64,
}

impl DjtParams {
    /// Largest Υ compatible with the measured zero-field linewidth.
    pub const DEFAULT_BOUND: f64 = 12.0;

    pub fn new(upsilon: f64, alpha: f64) -> Result<Self> {
        if !(upsilon.is_finite() && upsilon >= 0.0) {
            return Err(Error::InvalidInput(format!("upsilon must be >= 0, got {upsilon}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidInput("alpha must be finite".into()));
        }
        let mut a = alpha % 360.0;
        if a <= -180.0 {
            a += 360.0;
        } else if a > 180.0 {
            a -= 360.0;
        }
        Ok(DjtParams { upsilon, alpha: a })
    }

    pub fn zero() -> Self {
        DjtParams { upsilon: 0.0, alpha: 0.0 }
    }

    /// Build from Cartesian components (Υx, Υy).
    pub fn from_components(ux: f64, uy: f64) -> Self {
        let upsilon = ux.hypot(uy);
        let alpha = if upsilon == 0.0 { 0.0 } else { uy.atan2(ux).to_degrees() };
        DjtParams::new(upsilon, alpha).unwrap_or_else(|_| DjtParams::zero())
    }

    pub fn upsilon_x(&self) -> f64 {
        self.upsilon * cos_sin_deg(self.alpha).0
    }

    pub fn upsilon_y(&self) -> f64 {
        self.upsilon * cos_sin_deg(self.alpha).1
    }
}

/// Electric field in the NV frame (V/µm): ẑ points from the nitrogen to the
/// vacancy and x̂ lies in a vertical reflection plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldNV {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
}

impl FieldNV {
    pub fn new(fx: f64, fy: f64, fz: f64) -> Self {
        FieldNV { fx, fy, fz }
    }

    pub fn transverse(&self) -> f64 {
        self.fx.hypot(self.fy)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.fx, self.fy, self.fz]
    }
}

/// Symmetric strain tensor in the NV frame, stored as its six independent
/// components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StrainNV {
    pub e_xx: f64,
    pub e_yy: f64,
    pub e_zz: f64,
    pub e_xy: f64,
    pub e_xz: f64,
    pub e_yz: f64,
}

/// Amplitudes of the six symmetry-adapted deformation modes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StrainModes {
    pub a1: f64,
    pub a1_prime: f64,
    pub ex: f64,
    pub ey: f64,
    pub ex_prime: f64,
    pub ey_prime: f64,
}

impl StrainNV {
    pub fn zero() -> Self {
        StrainNV::default()
    }

    pub fn modes(&self) -> StrainModes {
        StrainModes {
            a1: self.e_zz,
            a1_prime: self.e_xx + self.e_yy,
            ex: self.e_xx - self.e_yy,
            ey: 2.0 * self.e_xy,
            ex_prime: 2.0 * self.e_xz,
            ey_prime: 2.0 * self.e_yz,
        }
    }

    /// Inverse of [`StrainNV::modes`].
    pub fn from_modes(m: StrainModes) -> Self {
        StrainNV {
            e_xx: 0.5 * (m.a1_prime + m.ex),
            e_yy: 0.5 * (m.a1_prime - m.ex),
            e_zz: m.a1,
            e_xy: 0.5 * m.ey,
            e_xz: 0.5 * m.ex_prime,
            e_yz: 0.5 * m.ey_prime,
        }
    }
}

/// One of the four ⟨111⟩ orientations of an NV center in the diamond lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvOrientation {
    pub label: &'static str,
    /// Rows are the NV x̂, ŷ, ẑ axes written in lab coordinates, so the matrix
    /// maps lab vectors into the NV frame.
    pub rotation: [[f64; 3]; 3],
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn scaled(v: [f64; 3], s: f64) -> [f64; 3] {
    [v[0] * s, v[1] * s, v[2] * s]
}

impl NvOrientation {
    fn from_axes(label: &'static str, z: [f64; 3], x: [f64; 3]) -> Self {
        let z = scaled(z, 1.0 / 3f64.sqrt());
        let x = scaled(x, 1.0 / 6f64.sqrt());
        let y = cross(z, x);
        NvOrientation { label, rotation: [x, y, z] }
    }

    /// NV along [111] with x̂ ∥ [1̄1̄2].
    pub fn n111() -> Self {
        Self::from_axes("[111]", [1.0, 1.0, 1.0], [-1.0, -1.0, 2.0])
    }

    /// NV along [1̄1̄1].
    pub fn n_1_11() -> Self {
        Self::from_axes("[-1-11]", [-1.0, -1.0, 1.0], [-1.0, 2.0, 1.0])
    }

    /// NV along [1̄11̄].
    pub fn n_11_1() -> Self {
        Self::from_axes("[-11-1]", [-1.0, 1.0, -1.0], [-1.0, -2.0, -1.0])
    }

    /// NV along [11̄1̄].
    pub fn n1_1_1() -> Self {
        Self::from_axes("[1-1-1]", [1.0, -1.0, -1.0], [-1.0, 1.0, -2.0])
    }

    /// All four orientations in a fixed order.
    ///
    /// The x̂ axes are chosen so that a field along [100] has the same NV-frame
    /// x component for every orientation while the y component changes sign
    /// between the {[111], [11̄1̄]} and {[1̄1̄1], [1̄11̄]} pairs.
    pub fn all() -> [NvOrientation; 4] {
        [Self::n111(), Self::n_1_11(), Self::n_11_1(), Self::n1_1_1()]
    }

    pub fn axis(&self) -> [f64; 3] {
        self.rotation[2]
    }

    pub fn to_nv(&self, v: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        let mut out = [0.0; 3];
        for (i, row) in r.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    pub fn to_lab(&self, v: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        let mut out = [0.0; 3];
        for (j, o) in out.iter_mut().enumerate() {
            *o = r[0][j] * v[0] + r[1][j] * v[1] + r[2][j] * v[2];
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.rotation;
        let c = cross(r[1], r[2]);
        r[0][0] * c[0] + r[0][1] * c[1] + r[0][2] * c[2]
    }
}

/// Express a lab-frame field in the frame of `orient`.
pub fn lab_field_to_nv(field_lab: [f64; 3], orient: &NvOrientation) -> FieldNV {
    let [fx, fy, fz] = orient.to_nv(field_lab);
    FieldNV { fx, fy, fz }
}

pub fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn normalize(v: [f64; 3]) -> Result<[f64; 3]> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidInput("direction vector must be nonzero and finite".into()));
    }
    Ok(scaled(v, 1.0 / n))
}

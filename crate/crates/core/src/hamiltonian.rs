//! Ground (4×4) and excited (2×2) Hamiltonians of the neutral NV center.
//!
//! Ground basis order is {Ex↑, Ex↓, Ey↑, Ey↓}; excited basis is {A1↑, A1↓}.
//! Ground energies use a mean-zero convention. Use [`transition_energies`]
//! for energies measured against the excited manifold.
//!
//! The transverse spin-orbit coupling does not act inside either manifold
//! and appears nowhere below.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::eigen::{hermitian_2x2, max_asymmetry, CMatrix, EigenSystem, DEGENERACY_TOL};
use crate::error::{Error, Result};
use crate::model::{lab_field_to_nv, normalize, DjtParams, FieldNV, NvOrientation, PhysicalConstants, StrainNV, THZ_TO_GHZ};

pub const GROUND_BASIS: &str = "Ex_up,Ex_down,Ey_up,Ey_down";
pub const EXCITED_BASIS: &str = "A1_up,A1_down";

/// The A, B, C, D coefficients of the ground-state energy formula
/// ε = A ± √(B² + C² + D²), all in GHz. A carries the excited-state
/// reference (−ε_es and the A₁ strain/field shifts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbcdCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl AbcdCoefficients {
    /// Half the ground splitting, √(B² + C² + D²).
    pub fn half_splitting(&self) -> f64 {
        (self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    pub fn splitting(&self) -> f64 {
        2.0 * self.half_splitting()
    }
}

/// Everything a Hamiltonian was assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HamiltonianInputs {
    pub djt: DjtParams,
    pub field: FieldNV,
    pub strain: StrainNV,
    pub consts: PhysicalConstants,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundHamiltonian {
    pub matrix: CMatrix,
    pub coefficients: AbcdCoefficients,
    pub inputs: HamiltonianInputs,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitedHamiltonian {
    pub matrix: CMatrix,
    pub inputs: HamiltonianInputs,
}

/// Direct transcription of the A, B, C, D coefficients.
///
/// The field enters C with a + sign (C = Υy + d⊥Fy + ...). Together with the
/// orientation frames of [`NvOrientation`] this is the convention under which
/// a [100] field drives every orientation toward the same high-field
/// polarization degrees.
pub fn abcd(djt: &DjtParams, field: &FieldNV, strain: &StrainNV, consts: &PhysicalConstants) -> AbcdCoefficients {
    let m = strain.modes();
    let a = -consts.eps_es_ghz() + consts.d_par * field.fz
        - THZ_TO_GHZ * (consts.eps_a1 * m.a1 + consts.eps_a1_prime * m.a1_prime);
    let b = djt.upsilon_x() - consts.d_perp * field.fx + THZ_TO_GHZ * (consts.eps_e * m.ex + consts.eps_e_prime * m.ex_prime);
    let c = djt.upsilon_y() + consts.d_perp * field.fy + THZ_TO_GHZ * (consts.eps_e * m.ey + consts.eps_e_prime * m.ey_prime);
    AbcdCoefficients { a, b, c, d: 0.5 * consts.lambda_par }
}

fn cz(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Assemble the 4×4 ground Hamiltonian.
pub fn build_ground(djt: &DjtParams, field: &FieldNV, strain: &StrainNV, consts: &PhysicalConstants) -> GroundHamiltonian {
    let k = abcd(djt, field, strain, consts);
    let mut h = DMatrix::from_element(4, 4, cz(0.0, 0.0));
    for (spin, (ex, ey)) in [(1.0, (0, 2)), (-1.0, (1, 3))] {
        h[(ex, ex)] = cz(k.b, 0.0);
        h[(ey, ey)] = cz(-k.b, 0.0);
        h[(ex, ey)] = cz(k.c, -spin * k.d);
        h[(ey, ex)] = cz(k.c, spin * k.d);
    }
    GroundHamiltonian {
        matrix: h,
        coefficients: k,
        inputs: HamiltonianInputs { djt: *djt, field: *field, strain: *strain, consts: *consts },
    }
}

/// Assemble the 2×2 excited Hamiltonian (proportional to the identity).
pub fn build_excited(field: &FieldNV, strain: &StrainNV, consts: &PhysicalConstants) -> ExcitedHamiltonian {
    let m = strain.modes();
    let e = consts.eps_es_ghz() - consts.d_par * field.fz
        + THZ_TO_GHZ * (consts.eps_a1 * m.a1 + consts.eps_a1_prime * m.a1_prime);
    let mut h = DMatrix::from_element(2, 2, cz(0.0, 0.0));
    h[(0, 0)] = cz(e, 0.0);
    h[(1, 1)] = cz(e, 0.0);
    ExcitedHamiltonian {
        matrix: h,
        inputs: HamiltonianInputs { djt: DjtParams::zero(), field: *field, strain: *strain, consts: *consts },
    }
}

/// Spin projection (in units of ħ/2) on the ground basis.
pub fn ground_spin_operator() -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![cz(1.0, 0.0), cz(-1.0, 0.0), cz(1.0, 0.0), cz(-1.0, 0.0)]))
}

impl GroundHamiltonian {
    pub fn max_asymmetry(&self) -> f64 {
        max_asymmetry(&self.matrix)
    }

    /// Eigensystem from the two per-spin 2×2 blocks.
    ///
    /// Columns are ordered (lower↑, lower↓, upper↑, upper↓), so every
    /// eigenvector is a pure spin state.
    pub fn eigensystem(&self) -> EigenSystem {
        let k = &self.coefficients;
        let mut vectors = DMatrix::from_element(4, 4, cz(0.0, 0.0));
        let mut values = vec![0.0; 4];
        for (col, (spin, (ex, ey))) in [(1.0, (0usize, 2usize)), (-1.0, (1, 3))].into_iter().enumerate() {
            let (vals, vecs) = hermitian_2x2(k.b, cz(k.c, -spin * k.d), -k.b);
            for (level, (val, vec)) in vals.iter().zip(vecs.iter()).enumerate() {
                let j = 2 * level + col;
                values[j] = *val;
                vectors[(ex, j)] = vec[0];
                vectors[(ey, j)] = vec[1];
            }
        }
        EigenSystem { values, vectors, basis: GROUND_BASIS, degeneracy_tol: DEGENERACY_TOL }
    }

    /// Ground splitting S (GHz) between the two doublets.
    pub fn splitting(&self) -> f64 {
        self.coefficients.splitting()
    }
}

impl ExcitedHamiltonian {
    pub fn energy(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    pub fn eigensystem(&self) -> EigenSystem {
        let e = self.energy();
        EigenSystem {
            values: vec![e, e],
            vectors: CMatrix::identity(2, 2),
            basis: EXCITED_BASIS,
            degeneracy_tol: DEGENERACY_TOL,
        }
    }
}

/// Optical transition energies (GHz) from the lower and upper ground
/// doublets to the excited manifold, lower-doublet transition first.
pub fn transition_energies(ground: &GroundHamiltonian, excited: &ExcitedHamiltonian) -> [f64; 2] {
    let r = ground.coefficients.half_splitting();
    let e = excited.energy();
    [e + r, e - r]
}

/// A field sweep: evenly spaced magnitudes along a fixed lab direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldRange {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl FieldRange {
    pub fn new(start: f64, stop: f64, points: usize) -> Result<Self> {
        if points < 2 || start == stop || !start.is_finite() || !stop.is_finite() {
            return Err(Error::EmptyRange);
        }
        Ok(FieldRange { start, stop, points })
    }

    /// Sample i, computed as start + i·step so that every platform gets the
    /// same bits.
    pub fn value(&self, i: usize) -> f64 {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        if i + 1 == self.points {
            self.stop
        } else {
            self.start + i as f64 * step
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelRow {
    pub field: f64,
    pub e_lower: f64,
    pub e_upper: f64,
}

/// Ground-level energies along a field sweep.
pub fn level_sweep(
    range: &FieldRange,
    direction: [f64; 3],
    orient: &NvOrientation,
    djt: &DjtParams,
    strain: &StrainNV,
    consts: &PhysicalConstants,
) -> Result<Vec<LevelRow>> {
    let u = normalize(direction)?;
    Ok(range
        .values()
        .into_iter()
        .map(|f| {
            let field = lab_field_to_nv([u[0] * f, u[1] * f, u[2] * f], orient);
            let r = abcd(djt, &field, strain, consts).half_splitting();
            LevelRow { field: f, e_lower: -r, e_upper: r }
        })
        .collect())
}

/// Mean exact ground splitting over `orientations` for a field of magnitude
/// `f` along the unit lab vector `u`.
pub fn mean_splitting(f: f64, u: [f64; 3], orientations: &[NvOrientation], djt: &DjtParams, strain: &StrainNV, consts: &PhysicalConstants) -> f64 {
    let total: f64 = orientations
        .iter()
        .map(|o| abcd(djt, &lab_field_to_nv([u[0] * f, u[1] * f, u[2] * f], o), strain, consts).splitting())
        .sum();
    total / orientations.len() as f64
}

/// Field magnitude (V/µm) along `direction` at which the exact ground
/// splitting, averaged over `orientations`, equals `target` (GHz).
///
/// The splitting is a convex function of the field magnitude, so when the
/// zero-field splitting lies below `target` there is exactly one crossing.
pub fn field_for_splitting(
    target: f64,
    direction: [f64; 3],
    orientations: &[NvOrientation],
    djt: &DjtParams,
    strain: &StrainNV,
    consts: &PhysicalConstants,
) -> Result<f64> {
    let u = normalize(direction)?;
    if orientations.is_empty() {
        return Err(Error::InvalidInput("no orientations given".into()));
    }
    let s = |f: f64| mean_splitting(f, u, orientations, djt, strain, consts);
    if s(0.0) >= target {
        return Err(Error::InvalidInput(format!("zero-field splitting {} already exceeds {target}", s(0.0))));
    }
    let mut hi = 1.0;
    while s(hi) < target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::InvalidInput("splitting target unreachable along this direction".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if s(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::diagonalize;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    #[test]
    fn spin_orbit_only() {
        let h = build_ground(&DjtParams::zero(), &FieldNV::default(), &StrainNV::zero(), &consts());
        let es = diagonalize(&h.matrix).unwrap();
        for (v, want) in es.values.iter().zip([-2.15, -2.15, 2.15, 2.15]) {
            assert!((v - want).abs() < 1e-12);
        }
        let k = h.coefficients;
        assert_eq!((k.a, k.b, k.c, k.d), (-521400.0, 0.0, 0.0, 2.15));
    }

    #[test]
    fn field_splitting_and_b_coefficient() {
        let h = build_ground(&DjtParams::zero(), &FieldNV::new(5.0, 0.0, 0.0), &StrainNV::zero(), &consts());
        let want = 2.0 * (25.0f64.powi(2) + 2.15f64.powi(2)).sqrt();
        assert!((h.splitting() - want).abs() < 1e-12);
        assert!((want - 50.184).abs() < 1e-3);
        let es = diagonalize(&h.matrix).unwrap();
        assert!((es.values[3] - 25.092).abs() < 1e-3);
        let k = abcd(&DjtParams::new(12.0, 0.0).unwrap(), &FieldNV::new(5.0, 0.0, 0.0), &StrainNV::zero(), &consts());
        assert_eq!(k.b, -13.0);
    }

    #[test]
    fn strain_coefficients() {
        let s = StrainNV { e_xx: 0.5e-5, e_yy: -0.5e-5, ..StrainNV::zero() };
        let k = abcd(&DjtParams::zero(), &FieldNV::default(), &s, &consts());
        assert!((k.b + 6.0).abs() < 1e-9);
        let s = StrainNV { e_zz: 1e-6, ..StrainNV::zero() };
        let x = build_excited(&FieldNV::default(), &s, &consts());
        assert!((x.energy() - 521400.192).abs() < 1e-9);
        assert_eq!(x.matrix[(0, 1)], cz(0.0, 0.0));
    }

    #[test]
    fn excited_ignores_field_without_longitudinal_dipole() {
        let a = build_excited(&FieldNV::new(1.0, 2.0, 30.0), &StrainNV::zero(), &consts());
        assert_eq!(a.energy(), 521400.0);
    }

    #[test]
    fn zero_field_djt_splitting() {
        let h = build_ground(&DjtParams::new(12.0, 0.0).unwrap(), &FieldNV::default(), &StrainNV::zero(), &consts());
        assert!((h.splitting() - (4.0 * 144.0 + 4.3f64 * 4.3).sqrt()).abs() < 1e-12);
        assert!((h.splitting() - 24.3822).abs() < 1e-4);
    }

    #[test]
    fn block_path_is_spin_pure() {
        let h = build_ground(&DjtParams::new(7.0, 33.0).unwrap(), &FieldNV::new(1.3, -0.4, 0.0), &StrainNV::zero(), &consts());
        let es = h.eigensystem();
        for k in 0..4 {
            let v = es.vector(k);
            let r = &h.matrix * &v - &v * cz(es.values[k], 0.0);
            assert!(r.norm() < 1e-12);
            let up = v[0].norm_sqr() + v[2].norm_sqr();
            assert!(up < 1e-28 || (up - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn trace_is_zero() {
        let h = build_ground(&DjtParams::new(7.0, 33.0).unwrap(), &FieldNV::new(1.3, -0.4, 2.0), &StrainNV::zero(), &consts());
        assert!(h.matrix.trace().norm() < 1e-14);
    }

    #[test]
    fn solves_for_splitting() {
        let c = consts();
        let d = DjtParams::new(12.0, 90.0).unwrap();
        let o = [NvOrientation::n111()];
        let f = field_for_splitting(50.0, [-1.0, -1.0, 2.0], &o, &d, &StrainNV::zero(), &c).unwrap();
        let h = build_ground(&d, &FieldNV::new(f, 0.0, 0.0), &StrainNV::zero(), &c);
        assert!((h.splitting() - 50.0).abs() < 1e-9);
        assert!(field_for_splitting(10.0, [1.0, 0.0, 0.0], &o, &d, &StrainNV::zero(), &c).is_err());
    }

    #[test]
    fn sweep_rejects_empty_range() {
        assert!(FieldRange::new(0.0, 10.0, 1).is_err());
        assert!(FieldRange::new(1.0, 1.0, 5).is_err());
        let r = FieldRange::new(0.0, 10.0, 401).unwrap();
        assert_eq!(r.value(200), 5.0);
        assert_eq!(r.value(400), 10.0);
    }
}

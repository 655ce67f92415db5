use nvzero::memory::{coupling_strength, r_times_delta_to_si, zpl_wavelength, Geometry, MemoryConfig};
use nvzero::model::PhysicalConstants;
use proptest::prelude::*;

fn bulk(energy: f64, density: f64, detuning: f64) -> MemoryConfig {
    MemoryConfig {
        pulse_energy: energy,
        nv_density: density,
        detuning,
        r_times_delta: r_times_delta_to_si(18.0 / 3f64.sqrt()),
        geometry: Geometry::Bulk { wavelength: zpl_wavelength(&PhysicalConstants::default()) },
    }
}

proptest! {
    #[test]
    fn scales_with_root_of_density_times_energy(e in 1e-12..1e-6f64, n in 1e18..1e25f64, k in 0.1..10.0f64) {
        let r1 = coupling_strength(&bulk(e, n, 1e11), 575e-9).unwrap().r;
        let r4 = coupling_strength(&bulk(4.0 * e, n, 1e11), 575e-9).unwrap().r;
        prop_assert!((r4 / r1 - 2.0).abs() < 1e-12);
        let rn = coupling_strength(&bulk(e, k * n, 1e11), 575e-9).unwrap().r;
        prop_assert!((rn / r1 - k.sqrt()).abs() < 1e-12 * k.sqrt());
    }

    #[test]
    fn inverse_in_detuning(d in 1e9..1e13f64, k in 0.1..10.0f64) {
        let a = coupling_strength(&bulk(1e-8, 1e22, d), 575e-9).unwrap().r;
        let b = coupling_strength(&bulk(1e-8, 1e22, k * d), 575e-9).unwrap().r;
        prop_assert!((a / b - k).abs() < 1e-12 * k);
    }
}

#[test]
fn waveguide_meets_bulk_at_matching_length() {
    let lam = zpl_wavelength(&PhysicalConstants::default());
    let b = bulk(1e-10, 1e22, 1e11);
    let width = 1e-6;
    let w = MemoryConfig { geometry: Geometry::Waveguide { width, length: width * width / lam }, ..b };
    let rb = coupling_strength(&b, lam).unwrap();
    let rw = coupling_strength(&w, lam).unwrap();
    assert!((rb.r - rw.r).abs() < 1e-12 * rb.r);
    assert!(!rw.waveguide_enhanced);
}

#[test]
fn rejects_nonpositive_geometry() {
    let b = bulk(1e-10, 1e22, 1e11);
    let bad = MemoryConfig { geometry: Geometry::Waveguide { width: 0.0, length: 1e-3 }, ..b };
    assert!(coupling_strength(&bad, 575e-9).is_err());
    let neg = MemoryConfig { nv_density: -1.0, ..b };
    assert!(coupling_strength(&neg, 575e-9).is_err());
}

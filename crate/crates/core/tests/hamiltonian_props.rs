use nvzero::eigen::{diagonalize, CMatrix};
use nvzero::hamiltonian::{abcd, build_ground, field_for_splitting, ground_spin_operator, level_sweep, mean_splitting, FieldRange};
use nvzero::model::{lab_field_to_nv, norm, DjtParams, FieldNV, NvOrientation, PhysicalConstants, StrainNV};
use proptest::prelude::*;

fn consts() -> PhysicalConstants {
    PhysicalConstants::default()
}

prop_compose! {
    fn djt()(upsilon in 0.0..30.0f64, alpha in -180.0..180.0f64) -> DjtParams {
        DjtParams::new(upsilon, alpha).unwrap()
    }
}

prop_compose! {
    fn field()(fx in -20.0..20.0f64, fy in -20.0..20.0f64, fz in -20.0..20.0f64) -> FieldNV {
        FieldNV::new(fx, fy, fz)
    }
}

prop_compose! {
    fn strain()(v in prop::array::uniform6(-2e-5..2e-5f64)) -> StrainNV {
        StrainNV { e_xx: v[0], e_yy: v[1], e_zz: v[2], e_xy: v[3], e_xz: v[4], e_yz: v[5] }
    }
}

fn residual(h: &CMatrix, v: &nalgebra::DVector<num_complex::Complex64>, lambda: f64) -> f64 {
    (h * v - v * num_complex::Complex64::new(lambda, 0.0)).norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn numeric_spectrum_matches_closed_form(d in djt(), f in field(), s in strain()) {
        let c = consts();
        let h = build_ground(&d, &f, &s, &c);
        prop_assert!(h.max_asymmetry() <= 1e-12);
        let r = abcd(&d, &f, &s, &c).half_splitting();
        let es = diagonalize(&h.matrix).unwrap();
        let want = [-r, -r, r, r];
        for (got, w) in es.values.iter().zip(want) {
            prop_assert!((got - w).abs() <= 1e-9, "{} vs {}", got, w);
        }
        // spin pairing
        prop_assert!((es.values[1] - es.values[0]).abs() <= 1e-9);
        prop_assert!((es.values[3] - es.values[2]).abs() <= 1e-9);
    }

    #[test]
    fn block_path_agrees_with_full_solver(d in djt(), f in field(), s in strain()) {
        let c = consts();
        let h = build_ground(&d, &f, &s, &c);
        let block = h.eigensystem();
        let full = diagonalize(&h.matrix).unwrap();
        for k in 0..4 {
            prop_assert!((block.values[k] - full.values[k]).abs() <= 1e-9);
            prop_assert!(residual(&h.matrix, &block.vector(k), block.values[k]) <= 1e-9);
            prop_assert!(residual(&h.matrix, &full.vector(k), full.values[k]) <= 1e-9);
        }
        let gram = block.vectors.adjoint() * &block.vectors;
        prop_assert!((gram - CMatrix::identity(4, 4)).norm() <= 1e-12);
    }

    #[test]
    fn degenerate_pairs_diagonalize_spin(d in djt(), f in field(), s in strain()) {
        let h = build_ground(&d, &f, &s, &consts());
        let es = h.eigensystem();
        let sz = ground_spin_operator();
        for pair in [(0, 1), (2, 3)] {
            let m = (es.vector(pair.0).adjoint() * &sz * es.vector(pair.1))[(0, 0)];
            prop_assert!(m.norm() <= 1e-9);
        }
    }

    #[test]
    fn frames_preserve_norm_and_invert(v in prop::array::uniform3(-100.0..100.0f64)) {
        for o in NvOrientation::all() {
            let w = o.to_nv(v);
            prop_assert!((norm(w) - norm(v)).abs() <= 1e-12 * norm(v).max(1.0));
            let back = o.to_lab(w);
            for k in 0..3 {
                prop_assert!((back[k] - v[k]).abs() <= 1e-12 * norm(v).max(1.0));
            }
        }
    }

    #[test]
    fn hundred_field_transverse_is_shared(f in 0.0..100.0f64) {
        let t: Vec<f64> = NvOrientation::all().iter().map(|o| lab_field_to_nv([f, 0.0, 0.0], o).transverse()).collect();
        for x in &t {
            prop_assert!((x - t[0]).abs() <= 1e-12 * f.max(1.0));
        }
    }
}

#[test]
fn sweeps_are_continuous() {
    let c = consts();
    let range = FieldRange::new(0.0, 10.0, 401).unwrap();
    let step = 10.0 / 400.0;
    let o = NvOrientation::n111();
    for (u, a) in [(0.0, 0.0), (12.0, 0.0), (12.0, 90.0), (12.0, -90.0), (12.0, 180.0)] {
        let d = DjtParams::new(u, a).unwrap();
        for dir in [o.to_lab([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0]] {
            let rows = level_sweep(&range, dir, &o, &d, &StrainNV::zero(), &c).unwrap();
            for w in rows.windows(2) {
                assert!((w[1].e_upper - w[0].e_upper).abs() <= 2.0 * c.d_perp * step + 1e-6);
                assert!((w[1].e_lower - w[0].e_lower).abs() <= 2.0 * c.d_perp * step + 1e-6);
            }
        }
    }
}

#[test]
fn all_orientations_share_the_hundred_curve() {
    let c = consts();
    let range = FieldRange::new(0.0, 10.0, 101).unwrap();
    let sweeps: Vec<_> = NvOrientation::all()
        .iter()
        .map(|o| level_sweep(&range, [1.0, 0.0, 0.0], o, &DjtParams::zero(), &StrainNV::zero(), &c).unwrap())
        .collect();
    for s in &sweeps[1..] {
        for (a, b) in s.iter().zip(&sweeps[0]) {
            assert!((a.e_upper - b.e_upper).abs() <= 1e-9);
        }
    }
}

#[test]
fn field_scale_along_own_axis() {
    let c = consts();
    let o = NvOrientation::n111();
    let x = o.to_lab([1.0, 0.0, 0.0]);
    let f = field_for_splitting(50.0, x, &[o], &DjtParams::zero(), &StrainNV::zero(), &c).unwrap();
    // closed form: 4(d F)^2 + lambda^2 = 50^2
    let want = ((2500.0 - c.lambda_par * c.lambda_par) / 4.0).sqrt() / c.d_perp;
    assert!((f - want).abs() < 1e-9, "{f} vs {want}");
    assert!((mean_splitting(f, x, &[o], &DjtParams::zero(), &StrainNV::zero(), &c) - 50.0).abs() < 1e-9);
    // a [100] field has transverse part sqrt(2/3) F for every orientation
    let all = NvOrientation::all();
    let g = field_for_splitting(50.0, [1.0, 0.0, 0.0], &all, &DjtParams::zero(), &StrainNV::zero(), &c).unwrap();
    assert!((g * (2.0f64 / 3.0).sqrt() - want).abs() < 1e-9);
}

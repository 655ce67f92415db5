#![allow(dead_code)]

use std::path::PathBuf;

use nvzero::figures::{fig2, fig3, standard_cases};
use nvzero::hamiltonian::FieldRange;
use nvzero::model::PhysicalConstants;

/// Resolution of the committed golden tables; the CLI reproduces them with
/// `--points 41`.
pub const GOLDEN_POINTS: usize = 41;

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

/// Every fig2/fig3 table at the default sweep (0..10 V/µm, Υ = 12 GHz), as
/// (file name, CSV text).
pub fn golden_tables() -> Vec<(String, String)> {
    let range = FieldRange::new(0.0, 10.0, GOLDEN_POINTS).unwrap();
    let cases = standard_cases(12.0).unwrap();
    let c = PhysicalConstants::default();
    let f2 = fig2(&range, &cases, &c).unwrap();
    let f3 = fig3(&range, &cases, &c).unwrap();
    [
        ("fig2a", &f2.a),
        ("fig2b", &f2.b),
        ("fig2c", &f2.c),
        ("fig2d", &f2.d),
        ("fig3b", &f3.b),
        ("fig3c", &f3.c),
        ("fig3d", &f3.d),
        ("fig3e", &f3.e),
    ]
    .into_iter()
    .map(|(n, t)| (format!("{n}.csv"), t.to_csv()))
    .collect()
}

/// Names of golden files whose committed bytes differ from a fresh run.
pub fn golden_mismatches() -> Vec<String> {
    golden_tables()
        .into_iter()
        .filter(|(name, text)| std::fs::read(golden_dir().join(name)).map_or(true, |b| b != text.as_bytes()))
        .map(|(name, _)| name)
        .collect()
}

/// Fit 100 noiseless single-line spectra with random σ in [5, 40] GHz and
/// return the largest relative width error and any unconverged cases.
pub fn fitter_regression() -> (f64, Vec<u64>) {
    use nvzero::spectro::{fit_single, synthesize, GaussianMixture, NoiseModel, Response, UniformGrid};
    use rand::{Rng, SeedableRng};

    let grid = UniformGrid::new(-250.0, 250.0, 1.0).unwrap();
    let response = Response::Gaussian { fwhm: 24.5 };
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut stuck = Vec::new();
    for case in 0..100 {
        let sigma = rng.gen_range(5.0..40.0);
        let t = GaussianMixture::single(rng.gen_range(100.0..5000.0), rng.gen_range(-10.0..10.0), sigma, rng.gen_range(0.0..50.0));
        let s = synthesize(&t, &response, &grid, NoiseModel::None, case).unwrap();
        let f = fit_single(&s).unwrap();
        if !f.converged {
            stuck.push(case);
        }
        worst = worst.max(((f.params.sigma - sigma) / sigma).abs());
    }
    (worst, stuck)
}

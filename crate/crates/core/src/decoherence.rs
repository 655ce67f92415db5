//! Strain broadening of the ground splitting, its effect on the noise
//! factor, and the single-phonon lifetime bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::abcd;
use crate::model::{DjtParams, FieldNV, PhysicalConstants, StrainModes, StrainNV, THZ_TO_GHZ};

fn e_energy_sq(consts: &PhysicalConstants) -> f64 {
    consts.eps_e * consts.eps_e + consts.eps_e_prime * consts.eps_e_prime
}

fn a1_energy_sq(consts: &PhysicalConstants) -> f64 {
    consts.eps_a1 * consts.eps_a1 + consts.eps_a1_prime * consts.eps_a1_prime
}

/// κ = √((ϵ_E² + ϵ'_E²)/(ϵ_A1² + ϵ'_A1²)), the ratio of transverse to
/// longitudinal strain susceptibility.
pub fn kappa(consts: &PhysicalConstants) -> Result<f64> {
    let den = a1_energy_sq(consts);
    if den == 0.0 {
        return Err(Error::InvalidInput("A1 strain energies are both zero".into()));
    }
    Ok((e_energy_sq(consts) / den).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Full expression with the Υ/λ∥ dependence.
    General,
    /// Limit 4Υ² ≫ λ∥², where the denominator becomes √(1 + 2κ²).
    LargeDjt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadeningResult {
    pub kappa: f64,
    /// Spread of the ground splitting (GHz).
    pub delta_s: f64,
    /// Observed spread of the optical transition (GHz), the input.
    pub delta_eps: f64,
    pub regime: Regime,
    /// Strain is taken as isotropic: every deformation mode has the same
    /// spread δe.
    pub strain_model: &'static str,
}

/// Spread δS of the ground splitting implied by an optical linewidth δε.
pub fn strain_broadening(delta_eps: f64, djt: &DjtParams, consts: &PhysicalConstants, regime: Regime) -> Result<BroadeningResult> {
    if !(delta_eps >= 0.0) {
        return Err(Error::InvalidInput(format!("delta_eps must be >= 0, got {delta_eps}")));
    }
    let k = kappa(consts)?;
    let ratio = match regime {
        Regime::General => djt_ratio(djt, consts),
        Regime::LargeDjt => 2.0,
    };
    let delta_s = k / (1.0 + k * k * ratio).sqrt() * delta_eps;
    Ok(BroadeningResult { kappa: k, delta_s, delta_eps, regime, strain_model: "isotropic" })
}

/// 8Υ²/(4Υ² + λ∥²); tends to 2 for large Υ.
fn djt_ratio(djt: &DjtParams, consts: &PhysicalConstants) -> f64 {
    let u2 = djt.upsilon * djt.upsilon;
    let den = 4.0 * u2 + consts.lambda_par * consts.lambda_par;
    if den == 0.0 {
        0.0
    } else {
        8.0 * u2 / den
    }
}

/// Splitting spread 2δe·√(ϵ_E² + ϵ'_E²) for isotropic strain of spread δe
/// (GHz).
pub fn splitting_spread_from_strain(delta_e: f64, consts: &PhysicalConstants) -> f64 {
    2.0 * delta_e * THZ_TO_GHZ * e_energy_sq(consts).sqrt()
}

/// Zero-field optical spread δε for isotropic strain of spread δe (GHz).
pub fn transition_spread_from_strain(delta_e: f64, djt: &DjtParams, consts: &PhysicalConstants) -> f64 {
    delta_e * THZ_TO_GHZ * (a1_energy_sq(consts) + e_energy_sq(consts) * djt_ratio(djt, consts)).sqrt()
}

/// Inverse of [`transition_spread_from_strain`].
pub fn strain_from_transition_spread(delta_eps: f64, djt: &DjtParams, consts: &PhysicalConstants) -> f64 {
    delta_eps / (THZ_TO_GHZ * (a1_energy_sq(consts) + e_energy_sq(consts) * djt_ratio(djt, consts)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrainedNoise {
    /// Noise factor at zero mean strain.
    pub p: f64,
    /// First-order spread of the noise factor.
    pub delta_p: f64,
}

/// Noise factor (C² + D²)/(4B²) and its first-order spread C·δC/(2B²) for a
/// field-induced splitting `s` with spread `delta_s` (δC = δS/2).
pub fn strained_noise_spread(s: f64, delta_s: f64, djt: &DjtParams, consts: &PhysicalConstants) -> Result<StrainedNoise> {
    if !(s > delta_s && delta_s >= 0.0) {
        return Err(Error::InvalidInput(format!("need s > delta_s >= 0, got s={s}, delta_s={delta_s}")));
    }
    let (b, c, d) = noise_coefficients(s, djt, consts);
    let p = (c * c + d * d) / (4.0 * b * b);
    let delta_p = (c * 0.5 * delta_s / (2.0 * b * b)).abs();
    Ok(StrainedNoise { p, delta_p })
}

/// B, C, D at a splitting produced by a field along the NV x̂ axis.
pub fn noise_coefficients(s: f64, djt: &DjtParams, consts: &PhysicalConstants) -> (f64, f64, f64) {
    (djt.upsilon_x() - 0.5 * s, djt.upsilon_y(), 0.5 * consts.lambda_par)
}

/// Mean phonon number 1/(exp(S/kBT) − 1).
pub fn bose_occupation(temperature: f64, splitting: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(temperature > 0.0 && splitting > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need T > 0 and S > 0, got T={temperature}, S={splitting}"
        )));
    }
    Ok(1.0 / (splitting / (consts.kb() * temperature)).exp_m1())
}

fn occupation_or_zero(temperature: f64, splitting: f64, consts: &PhysicalConstants) -> Result<f64> {
    if temperature == 0.0 && splitting > 0.0 {
        Ok(0.0)
    } else {
        bose_occupation(temperature, splitting, consts)
    }
}

/// Shape of the single-phonon relaxation rate, prefactor·S³(2N + 1).
pub fn phonon_rate_shape(prefactor: f64, splitting: f64, temperature: f64, consts: &PhysicalConstants) -> Result<f64> {
    let n = occupation_or_zero(temperature, splitting, consts)?;
    Ok(prefactor * splitting.powi(3) * (2.0 * n + 1.0))
}

/// Reference measurement the lifetime bound is scaled from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifetimeReference {
    /// Lower bound on the reference orbital lifetime (µs).
    pub tau_ref: f64,
    /// Reference splitting (GHz).
    pub s_ref: f64,
    /// Reference temperature (K).
    pub t_ref: f64,
    /// Ratio of the reference center's strain susceptibility to ours.
    pub chi_ratio: f64,
}

impl Default for LifetimeReference {
    fn default() -> Self {
        LifetimeReference { tau_ref: 1.3, s_ref: 3.9, t_ref: 5.8, chi_ratio: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimeBound {
    /// Minimum orbital lifetime (ns).
    pub tau_min: f64,
    pub temperature: f64,
    pub splitting: f64,
    pub bose_occupation: f64,
    pub reference: LifetimeReference,
}

/// Lower bound on the orbital lifetime at (splitting, temperature), scaled
/// from the reference via the S³(2N + 1) law. T = 0 uses N = 0.
pub fn lifetime_bound(splitting: f64, temperature: f64, reference: &LifetimeReference, consts: &PhysicalConstants) -> Result<LifetimeBound> {
    let r = reference;
    if !(splitting > 0.0 && temperature >= 0.0 && r.tau_ref > 0.0 && r.s_ref > 0.0 && r.t_ref > 0.0 && r.chi_ratio > 0.0) {
        return Err(Error::InvalidInput("lifetime inputs must be positive".into()));
    }
    let n_ref = bose_occupation(r.t_ref, r.s_ref, consts)?;
    let n = occupation_or_zero(temperature, splitting, consts)?;
    let tau_ref_ns = r.tau_ref * 1e3;
    let tau_min = tau_ref_ns * r.chi_ratio * r.s_ref.powi(3) * (2.0 * n_ref + 1.0) / (splitting.powi(3) * (2.0 * n + 1.0));
    Ok(LifetimeBound { tau_min, temperature, splitting, bose_occupation: n, reference: *r })
}

/// How random strain tensors are drawn in the Monte-Carlo check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrainSampling {
    /// The six deformation modes are i.i.d. normal with spread δe.
    IsotropicModes,
    /// The six tensor components are i.i.d. normal with spread δe.
    IidComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloSpread {
    pub samples: usize,
    pub seed: u64,
    pub sampling: StrainSampling,
    pub delta_e: f64,
    /// Splitting without strain (GHz).
    pub nominal_splitting: f64,
    pub mean_splitting: f64,
    /// Standard deviation of the sampled splittings (GHz).
    pub std_splitting: f64,
    /// Linear-response prediction for the same sampling (GHz).
    pub predicted: f64,
}

/// Sample random strain around a field-induced splitting and measure the
/// spread of the exact ground splitting.
///
/// The field points along the NV x̂ axis with magnitude chosen so that the
/// field alone gives `field_splitting`. Sample k draws from its own ChaCha
/// stream, so the result does not depend on thread scheduling.
pub fn monte_carlo_splitting_spread(
    delta_e: f64,
    field_splitting: f64,
    djt: &DjtParams,
    consts: &PhysicalConstants,
    samples: usize,
    seed: u64,
    sampling: StrainSampling,
) -> Result<MonteCarloSpread> {
    if samples < 2 || !(delta_e >= 0.0) || consts.d_perp == 0.0 {
        return Err(Error::InvalidInput("need >= 2 samples, delta_e >= 0 and d_perp != 0".into()));
    }
    let field = FieldNV::new(field_splitting / (2.0 * consts.d_perp), 0.0, 0.0);
    let splittings: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut draw = || -> f64 {
                let z: f64 = StandardNormal.sample(&mut rng);
                delta_e * z
            };
            let strain = match sampling {
                StrainSampling::IsotropicModes => StrainNV::from_modes(StrainModes {
                    a1: draw(),
                    a1_prime: draw(),
                    ex: draw(),
                    ey: draw(),
                    ex_prime: draw(),
                    ey_prime: draw(),
                }),
                StrainSampling::IidComponents => StrainNV {
                    e_xx: draw(),
                    e_yy: draw(),
                    e_zz: draw(),
                    e_xy: draw(),
                    e_xz: draw(),
                    e_yz: draw(),
                },
            };
            abcd(djt, &field, &strain, consts).splitting()
        })
        .collect();
    let n = samples as f64;
    let mean = splittings.iter().sum::<f64>() / n;
    let var = splittings.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0);
    let predicted = match sampling {
        StrainSampling::IsotropicModes => splitting_spread_from_strain(delta_e, consts),
        // e_xx − e_yy has variance 2δe², 2e_xz has 4δe²
        StrainSampling::IidComponents => {
            2.0 * THZ_TO_GHZ
                * delta_e
                * (2.0 * consts.eps_e * consts.eps_e + 4.0 * consts.eps_e_prime * consts.eps_e_prime).sqrt()
        }
    };
    Ok(MonteCarloSpread {
        samples,
        seed,
        sampling,
        delta_e,
        nominal_splitting: abcd(djt, &field, &StrainNV::zero(), consts).splitting(),
        mean_splitting: mean,
        std_splitting: var.sqrt(),
        predicted,
    })
}

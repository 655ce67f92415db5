//! Line-shape analysis of a zero-phonon line measured through a finite
//! instrument response.
//!
//! A Gaussian model (one line, or a symmetric pair of equal lines) is
//! convolved with the response on the data grid and fitted by damped
//! Gauss-Newton. Sweeping a fixed pair splitting and watching the residual
//! grow gives an upper bound on any hidden splitting.

use std::io::Read;

use nalgebra::{Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::PhysicalConstants;

/// FWHM of a Gaussian in units of its standard deviation, 2√(2 ln 2).
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

const MAX_ITERATIONS: usize = 500;
const UNIFORM_TOL: f64 = 1e-9;
const RESAMPLE_TOL: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Response {
    /// Gaussian instrument response of the given FWHM (GHz). Zero means a
    /// perfect instrument.
    Gaussian { fwhm: f64 },
    /// Response sampled on the same grid as the counts, peaked near 0 GHz.
    Sampled(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Frequencies (GHz) relative to the line center, strictly increasing.
    pub freqs: Vec<f64>,
    pub counts: Vec<f64>,
    pub response: Response,
}

/// Evenly spaced frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && stop > start) {
            return Err(Error::InvalidInput("grid needs step > 0 and stop > start".into()));
        }
        let len = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok(UniformGrid { start, step, len })
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Check that `freqs` is uniform; returns the step.
pub fn uniform_step(freqs: &[f64]) -> Result<f64> {
    if freqs.len() < 2 {
        return Err(Error::NonUniformGrid("need at least two samples".into()));
    }
    let step = (freqs[freqs.len() - 1] - freqs[0]) / (freqs.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::NonUniformGrid("frequencies must increase".into()));
    }
    for w in freqs.windows(2) {
        let h = w[1] - w[0];
        if h <= 0.0 {
            return Err(Error::NonUniformGrid("frequencies must be strictly increasing".into()));
        }
        if ((h - step) / step).abs() > UNIFORM_TOL {
            return Err(Error::NonUniformGrid(format!("spacing {h} differs from mean step {step}")));
        }
    }
    Ok(step)
}

/// Discrete convolution kernel: offsets (GHz) with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub offsets: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Kernel {
    pub fn impulse() -> Self {
        Kernel { offsets: vec![0.0], weights: vec![1.0] }
    }

    /// Build the kernel for `response` on a grid with the given frequencies.
    pub fn new(response: &Response, freqs: &[f64]) -> Result<Self> {
        let step = uniform_step(freqs)?;
        match response {
            Response::Gaussian { fwhm } => {
                if !(*fwhm >= 0.0) {
                    return Err(Error::InvalidInput("response FWHM must be >= 0".into()));
                }
                if *fwhm == 0.0 {
                    return Ok(Kernel::impulse());
                }
                let s = fwhm / FWHM_PER_SIGMA;
                let half = (8.0 * s / step).ceil() as i64;
                let offsets: Vec<f64> = (-half..=half).map(|j| j as f64 * step).collect();
                let raw: Vec<f64> = offsets.iter().map(|u| (-0.5 * (u / s) * (u / s)).exp()).collect();
                Ok(Kernel::normalized(offsets, raw))
            }
            Response::Sampled(w) => {
                if w.len() != freqs.len() {
                    return Err(Error::DimensionMismatch("sampled response length differs from grid".into()));
                }
                if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
                    return Err(Error::InvalidInput("sampled response must be >= 0 with positive sum".into()));
                }
                Ok(Kernel::normalized(freqs.to_vec(), w.clone()))
            }
        }
    }

    fn normalized(offsets: Vec<f64>, raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        Kernel { offsets, weights: raw.into_iter().map(|v| v / total).collect() }
    }

    /// Standard deviation of the kernel (GHz).
    pub fn sigma(&self) -> f64 {
        let mean: f64 = self.offsets.iter().zip(&self.weights).map(|(u, w)| u * w).sum();
        self.offsets.iter().zip(&self.weights).map(|(u, w)| w * (u - mean) * (u - mean)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    /// Peak height.
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub components: Vec<GaussianComponent>,
    pub baseline: f64,
}

impl GaussianMixture {
    pub fn single(amplitude: f64, center: f64, sigma: f64, baseline: f64) -> Self {
        GaussianMixture { components: vec![GaussianComponent { amplitude, center, sigma }], baseline }
    }

    /// Two equal lines split symmetrically about `center`.
    pub fn doublet(amplitude: f64, center: f64, sigma: f64, splitting: f64, baseline: f64) -> Self {
        let h = 0.5 * splitting;
        GaussianMixture {
            components: vec![
                GaussianComponent { amplitude, center: center - h, sigma },
                GaussianComponent { amplitude, center: center + h, sigma },
            ],
            baseline,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let z = (x - c.center) / c.sigma;
                c.amplitude * (-0.5 * z * z).exp()
            })
            .sum()
    }
}

/// Convolve `model` with `kernel` and sample on `grid`. The baseline is
/// added after convolution.
pub fn convolve(model: &GaussianMixture, kernel: &Kernel, grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&x| {
            let s: f64 = kernel.offsets.iter().zip(&kernel.weights).map(|(u, w)| w * model.eval(x - u)).sum();
            model.baseline + s
        })
        .collect()
}

/// Convolve against a response on a checked uniform grid.
pub fn convolve_response(model: &GaussianMixture, response: &Response, grid: &[f64]) -> Result<Vec<f64>> {
    let k = Kernel::new(response, grid)?;
    Ok(convolve(model, &k, grid))
}

/// Which model family a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelKind {
    Single,
    /// Two equal Gaussians of common width at center ± splitting/2.
    Double { splitting: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitParams {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
    pub baseline: f64,
    pub splitting: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub params: FitParams,
    pub ssr: f64,
    pub converged: bool,
    pub iterations: usize,
    /// The width hit its lower limit: the line is not resolved beyond the
    /// instrument response.
    pub sigma_at_floor: bool,
}

struct Problem<'a> {
    y: &'a [f64],
    kernel: Kernel,
    half_splits: Vec<f64>,
    sigma_floor: f64,
    // x_i - u_j = lattice(i - j + kernel.len() - 1): the model only needs
    // evaluating once per lattice point
    lattice: Vec<f64>,
}

impl Problem<'_> {
    fn residuals_and_jacobian(&self, t: &[f64; 4], want_jac: bool) -> (Vec<f64>, Vec<[f64; 4]>) {
        let [amp, c, s, b] = *t;
        let nl = self.lattice.len();
        let (mut g0, mut g1, mut g2) = (vec![0.0; nl], vec![0.0; nl], vec![0.0; nl]);
        for (k, &l) in self.lattice.iter().enumerate() {
            for h in &self.half_splits {
                let dx = l - c - h;
                let z = dx / s;
                let g = (-0.5 * z * z).exp();
                g0[k] += g;
                if want_jac {
                    g1[k] += g * dx;
                    g2[k] += g * dx * dx;
                }
            }
        }
        let nk = self.kernel.weights.len();
        let mut r = Vec::with_capacity(self.y.len());
        let mut jac = Vec::with_capacity(if want_jac { self.y.len() } else { 0 });
        for (i, &yi) in self.y.iter().enumerate() {
            let (mut m, mut d1, mut d2) = (0.0, 0.0, 0.0);
            for (j, w) in self.kernel.weights.iter().enumerate() {
                let k = i + nk - 1 - j;
                m += w * g0[k];
                if want_jac {
                    d1 += w * g1[k];
                    d2 += w * g2[k];
                }
            }
            r.push(b + amp * m - yi);
            if want_jac {
                jac.push([m, d1 * amp / (s * s), d2 * amp / (s * s * s), 1.0]);
            }
        }
        (r, jac)
    }

    fn ssr(&self, t: &[f64; 4]) -> f64 {
        self.residuals_and_jacobian(t, false).0.iter().map(|v| v * v).sum()
    }

    fn solve(&self, start: [f64; 4]) -> FitResult {
        let mut t = start;
        t[2] = t[2].max(self.sigma_floor);
        let mut mu = 1e-3;
        let mut ssr = self.ssr(&t);
        let scale: f64 = self.y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
        let mut converged = false;
        let mut iterations = 0;
        'outer: while iterations < MAX_ITERATIONS {
            iterations += 1;
            let (r, jac) = self.residuals_and_jacobian(&t, true);
            let mut a = Matrix4::<f64>::zeros();
            let mut g = Vector4::<f64>::zeros();
            for (ri, ji) in r.iter().zip(&jac) {
                let j = Vector4::from(*ji);
                a += j * j.transpose();
                g += j * *ri;
            }
            loop {
                let mut damped = a;
                for k in 0..4 {
                    damped[(k, k)] += mu * a[(k, k)].max(1e-300);
                }
                let step = match damped.cholesky() {
                    Some(ch) => ch.solve(&(-g)),
                    None => {
                        mu *= 10.0;
                        if mu > 1e20 {
                            break 'outer;
                        }
                        continue;
                    }
                };
                let mut trial = [t[0] + step[0], t[1] + step[1], t[2] + step[2], t[3] + step[3]];
                trial[2] = trial[2].max(self.sigma_floor);
                let trial_ssr = self.ssr(&trial);
                if trial_ssr.is_finite() && trial_ssr <= ssr {
                    let refs = [t[0].abs(), t[2], t[2], t[0].abs()];
                    let rel_step = (0..4)
                        .map(|k| (trial[k] - t[k]).abs() / t[k].abs().max(refs[k]).max(f64::MIN_POSITIVE))
                        .fold(0.0, f64::max);
                    let rel_change = (ssr - trial_ssr) / ssr.max(f64::MIN_POSITIVE);
                    t = trial;
                    ssr = trial_ssr;
                    mu = (mu / 3.0).max(1e-12);
                    if (rel_change < 1e-10 && rel_step < 1e-8) || ssr <= 1e-28 * scale {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                mu *= 4.0;
                if mu > 1e16 {
                    // no downhill step at any damping: gradient is at rounding level
                    converged = true;
                    break 'outer;
                }
            }
        }
        let splitting = if self.half_splits.len() == 2 { Some(2.0 * self.half_splits[1]) } else { None };
        FitResult {
            params: FitParams { amplitude: t[0], center: t[1], sigma: t[2], baseline: t[3], splitting },
            ssr,
            converged,
            iterations,
            sigma_at_floor: t[2] <= self.sigma_floor * (1.0 + 1e-9),
        }
    }
}

fn problem<'a>(data: &'a Spectrum, kind: ModelKind) -> Result<Problem<'a>> {
    if data.freqs.len() != data.counts.len() {
        return Err(Error::DimensionMismatch("frequency and count columns differ in length".into()));
    }
    if data.freqs.len() < 8 {
        return Err(Error::InvalidInput("need at least 8 points".into()));
    }
    let step = uniform_step(&data.freqs)?;
    let kernel = Kernel::new(&data.response, &data.freqs)?;
    let half_splits = match kind {
        ModelKind::Single => vec![0.0],
        ModelKind::Double { splitting } => vec![-0.5 * splitting, 0.5 * splitting],
    };
    let nk = kernel.offsets.len();
    let base = data.freqs[0] - kernel.offsets[0];
    let lattice = (0..data.freqs.len() + nk - 1).map(|k| base + (k as f64 - (nk - 1) as f64) * step).collect();
    Ok(Problem { y: &data.counts, kernel, half_splits, sigma_floor: 0.25 * step, lattice })
}

/// Sum of squared residuals of a model at given parameters, without fitting.
pub fn model_ssr(data: &Spectrum, kind: ModelKind, params: &FitParams) -> Result<f64> {
    let p = problem(data, kind)?;
    Ok(p.ssr(&[params.amplitude, params.center, params.sigma, params.baseline]))
}

/// Moment-based starting point for a single-line fit.
fn initial_guess(data: &Spectrum, kernel_sigma: f64, floor: f64) -> Result<[f64; 4]> {
    let lo = data.counts.iter().copied().fold(f64::INFINITY, f64::min);
    let (imax, hi) = data
        .counts
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let amp = hi - lo;
    if !(amp > 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE)) {
        return Err(Error::FlatSpectrum);
    }
    let half = lo + 0.5 * amp;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> f64 {
        let mut prev = imax;
        for i in range {
            if data.counts[i] < half {
                let (x0, y0, x1, y1) = (data.freqs[prev], data.counts[prev], data.freqs[i], data.counts[i]);
                return x0 + (half - y0) / (y1 - y0) * (x1 - x0);
            }
            prev = i;
        }
        data.freqs[prev]
    };
    let left = crossing(&mut (0..imax).rev());
    let right = crossing(&mut (imax + 1..data.counts.len()));
    let observed = ((right - left) / FWHM_PER_SIGMA).max(floor);
    let sigma = (observed * observed - kernel_sigma * kernel_sigma).max(4.0 * floor * floor).sqrt();
    // the convolved peak is lower than the model peak by sigma/observed
    let model_amp = amp * (sigma * sigma + kernel_sigma * kernel_sigma).sqrt() / sigma;
    Ok([model_amp, data.freqs[imax], sigma, lo])
}

/// Fit one Gaussian (convolved with the response) plus a constant baseline.
pub fn fit_single(data: &Spectrum) -> Result<FitResult> {
    let p = problem(data, ModelKind::Single)?;
    let start = initial_guess(data, p.kernel.sigma(), p.sigma_floor)?;
    Ok(p.solve(start))
}

/// Fit a symmetric pair of equal Gaussians with fixed `splitting`, starting
/// from a single-line fit.
pub fn fit_double(data: &Spectrum, splitting: f64, single: &FitResult) -> Result<FitResult> {
    if !(splitting >= 0.0) {
        return Err(Error::InvalidInput("splitting must be >= 0".into()));
    }
    let p = problem(data, ModelKind::Double { splitting })?;
    let s = single.params;
    let sigma = (s.sigma * s.sigma - 0.25 * splitting * splitting).max(p.sigma_floor * p.sigma_floor).sqrt();
    let start = [0.5 * s.amplitude * s.sigma / sigma, s.center, sigma, s.baseline];
    Ok(p.solve(start))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub splitting: f64,
    pub fit: FitResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub single: FitResult,
    pub points: Vec<SweepPoint>,
    pub min_ssr: f64,
    /// Splitting with the smallest residual.
    pub best_splitting: f64,
    /// The zero-splitting residual is already twice the minimum: the data
    /// resolve a doublet, so there is no upper bound to report.
    pub resolved: bool,
    /// Smallest splitting above the best one whose residual is twice the
    /// minimum. Absent when `resolved`.
    pub bound: Option<f64>,
}

impl SweepOutcome {
    pub fn relative_ssr(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.fit.ssr / self.min_ssr).collect()
    }
}

/// Fit the doublet model at every splitting and locate the residual-doubling
/// bound by linear interpolation.
pub fn fit_double_sweep(data: &Spectrum, splittings: &[f64]) -> Result<SweepOutcome> {
    if splittings.first() != Some(&0.0) {
        return Err(Error::InvalidInput("splittings must start at 0".into()));
    }
    if splittings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("splittings must be strictly ascending".into()));
    }
    let single = fit_single(data)?;
    let fits: Vec<Result<FitResult>> = splittings.par_iter().map(|&s| fit_double(data, s, &single)).collect();
    let mut points = Vec::with_capacity(fits.len());
    for (s, f) in splittings.iter().zip(fits) {
        points.push(SweepPoint { splitting: *s, fit: f? });
    }
    let (imin, min_ssr) = points
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, p)| if p.fit.ssr < acc.1 { (i, p.fit.ssr) } else { acc });
    let best_splitting = points[imin].splitting;
    let resolved = points[0].fit.ssr >= 2.0 * min_ssr;
    let bound = if resolved { None } else { Some(doubling_point(&points[imin..], min_ssr)?) };
    Ok(SweepOutcome { single, points, min_ssr, best_splitting, resolved, bound })
}

fn doubling_point(points: &[SweepPoint], min_ssr: f64) -> Result<f64> {
    let target = 2.0 * min_ssr;
    for k in 1..points.len() {
        let (a, b) = (&points[k - 1], &points[k]);
        if b.fit.ssr >= target {
            if a.fit.ssr >= target {
                return Ok(a.splitting);
            }
            let t = (target - a.fit.ssr) / (b.fit.ssr - a.fit.ssr);
            return Ok(a.splitting + t * (b.splitting - a.splitting));
        }
    }
    Err(Error::BracketingFailed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpsilonBound {
    pub upsilon_max: f64,
    /// The splitting bound was below λ∥ and the result was clamped to 0.
    pub clamped: bool,
}

/// Largest Υ whose zero-field splitting √(4Υ² + λ∥²) stays below `bound`.
pub fn upsilon_bound(splitting_bound: f64, consts: &PhysicalConstants) -> UpsilonBound {
    let l = consts.lambda_par;
    let d = splitting_bound * splitting_bound - l * l;
    UpsilonBound { upsilon_max: 0.5 * d.max(0.0).sqrt(), clamped: d < 0.0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    None,
    /// Additive white noise of fixed standard deviation.
    Gaussian { std: f64 },
    /// Noise growing as the square root of the signal, scaled so that the
    /// peak has the given signal-to-noise ratio.
    PoissonLike { peak_snr: f64 },
}

/// Sample `truth` through `response` on `grid` and add seeded noise.
/// Point i always receives the i-th normal draw of the seed's stream.
pub fn synthesize(truth: &GaussianMixture, response: &Response, grid: &UniformGrid, noise: NoiseModel, seed: u64) -> Result<Spectrum> {
    let freqs = grid.values();
    let clean = convolve_response(truth, response, &freqs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let peak = clean.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let counts = clean
        .iter()
        .map(|&y| {
            let z: f64 = StandardNormal.sample(&mut rng);
            match noise {
                NoiseModel::None => y,
                NoiseModel::Gaussian { std } => y + std * z,
                NoiseModel::PoissonLike { peak_snr } => y + (peak / peak_snr) * (y.max(0.0) / peak).sqrt() * z,
            }
        })
        .collect();
    Ok(Spectrum { freqs, counts, response: response.clone() })
}

/// Noise level that puts the residual-doubling point of a noiseless spectrum
/// at `target` splitting.
///
/// For a line that is truly single, the best residual is about
/// (N − 4)·std² and the doublet model adds a mismatch M(s) that does not
/// depend on noise. Doubling happens where M(s) equals the noise floor, so
/// std = √(M(target)/(N − 4)), with M read off the noiseless sweep.
pub fn noise_for_bound(clean: &Spectrum, splittings: &[f64], target: f64) -> Result<f64> {
    let sweep = fit_double_sweep(clean, splittings)?;
    let k = splittings.iter().position(|&s| s >= target).ok_or(Error::BracketingFailed)?;
    let m = if k == 0 {
        sweep.points[0].fit.ssr
    } else {
        let (a, b) = (&sweep.points[k - 1], &sweep.points[k]);
        let t = (target - a.splitting) / (b.splitting - a.splitting);
        a.fit.ssr + t * (b.fit.ssr - a.fit.ssr)
    };
    let dof = clean.freqs.len() as f64 - 4.0;
    Ok((m.max(0.0) / dof).sqrt())
}

/// Read a spectrum from CSV: frequency_GHz, counts and an optional third
/// column with a sampled response. A header row is optional. Grids with up
/// to 1% spacing jitter are resampled onto a uniform grid.
pub fn read_spectrum_csv<R: Read>(reader: R, fallback: Response) -> Result<Spectrum> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => rows.push(v),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::InvalidInput(format!("csv row {}: {e}", i + 1))),
        }
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("spectrum file has no data".into()));
    }
    let width = rows[0].len();
    if !(width == 2 || width == 3) || rows.iter().any(|r| r.len() != width) {
        return Err(Error::InvalidInput("expected 2 or 3 numeric columns on every row".into()));
    }
    let freqs: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let counts: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let resp: Option<Vec<f64>> = (width == 3).then(|| rows.iter().map(|r| r[2]).collect());
    resample(freqs, counts, resp, fallback)
}

fn resample(freqs: Vec<f64>, counts: Vec<f64>, resp: Option<Vec<f64>>, fallback: Response) -> Result<Spectrum> {
    if freqs.len() < 2 || freqs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonUniformGrid("frequencies must be strictly increasing".into()));
    }
    let n = freqs.len();
    let step = (freqs[n - 1] - freqs[0]) / (n - 1) as f64;
    let jitter = freqs.windows(2).map(|w| ((w[1] - w[0] - step) / step).abs()).fold(0.0, f64::max);
    if jitter > RESAMPLE_TOL {
        return Err(Error::NonUniformGrid(format!("spacing jitter {:.3}% exceeds 1%", 100.0 * jitter)));
    }
    let response = |r: Option<Vec<f64>>| r.map(Response::Sampled).unwrap_or(fallback.clone());
    if jitter <= UNIFORM_TOL {
        return Ok(Spectrum { freqs, counts, response: response(resp) });
    }
    let grid: Vec<f64> = (0..n).map(|i| if i + 1 == n { freqs[n - 1] } else { freqs[0] + i as f64 * step }).collect();
    let interp = |ys: &[f64]| -> Vec<f64> {
        let mut j = 0;
        grid.iter()
            .map(|&x| {
                while j + 2 < n && freqs[j + 1] < x {
                    j += 1;
                }
                let t = (x - freqs[j]) / (freqs[j + 1] - freqs[j]);
                ys[j] + t * (ys[j + 1] - ys[j])
            })
            .collect()
    };
    let counts = interp(&counts);
    let resp = resp.map(|r| interp(&r));
    Ok(Spectrum { freqs: grid, counts, response: response(resp) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_line() -> GaussianMixture {
        GaussianMixture::single(1000.0, 0.0, 16.0, 20.0)
    }

    fn grid() -> UniformGrid {
        UniformGrid::new(-150.0, 150.0, 1.0).unwrap()
    }

    #[test]
    fn kernel_sigma() {
        let g = grid().values();
        let k = Kernel::new(&Response::Gaussian { fwhm: 24.5 }, &g).unwrap();
        assert!((k.sigma() - 24.5 / FWHM_PER_SIGMA).abs() < 1e-9);
        assert!((k.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn impulse_is_identity() {
        let g = grid().values();
        let m = reference_line();
        let y = convolve_response(&m, &Response::Gaussian { fwhm: 0.0 }, &g).unwrap();
        for (x, v) in g.iter().zip(y) {
            assert_eq!(v, m.baseline + m.eval(*x));
        }
    }

    #[test]
    fn noiseless_fit() {
        let s = synthesize(&reference_line(), &Response::Gaussian { fwhm: 24.5 }, &grid(), NoiseModel::None, 1).unwrap();
        let f = fit_single(&s).unwrap();
        assert!(f.converged);
        assert!((f.params.sigma - 16.0).abs() < 1e-3, "{:?}", f);
        assert!((f.params.baseline - 20.0).abs() < 1e-6);
    }

    #[test]
    fn flat_spectrum_rejected() {
        let g = grid();
        let s = Spectrum { freqs: g.values(), counts: vec![3.0; g.len], response: Response::Gaussian { fwhm: 24.5 } };
        assert_eq!(fit_single(&s), Err(Error::FlatSpectrum));
    }

    #[test]
    fn upsilon_bounds() {
        let c = PhysicalConstants::default();
        let b = upsilon_bound(24.38, &c);
        assert!((b.upsilon_max - 12.0).abs() < 0.01 && !b.clamped);
        assert_eq!(upsilon_bound(4.3, &c).upsilon_max, 0.0);
        let low = upsilon_bound(3.0, &c);
        assert!(low.clamped && low.upsilon_max == 0.0);
    }

    #[test]
    fn csv_ingest() {
        let text = "frequency_GHz,counts\n0,1\n1.001,2\n2,3\n3,2\n";
        let s = read_spectrum_csv(text.as_bytes(), Response::Gaussian { fwhm: 1.0 }).unwrap();
        assert_eq!(s.freqs, vec![0.0, 1.0, 2.0, 3.0]);
        assert!((s.counts[1] - (2.0 - 0.001)).abs() < 1e-3);
        let bad = "0,1\n1.5,2\n2,3\n";
        assert!(matches!(read_spectrum_csv(bad.as_bytes(), Response::Gaussian { fwhm: 1.0 }), Err(Error::NonUniformGrid(_))));
        let three = "0,1,0\n1,2,1\n2,1,0\n";
        let s = read_spectrum_csv(three.as_bytes(), Response::Gaussian { fwhm: 1.0 }).unwrap();
        assert_eq!(s.response, Response::Sampled(vec![0.0, 1.0, 0.0]));
    }
}

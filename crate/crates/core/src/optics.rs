//! Transition dipoles, polarization degrees, Raman coupling and the
//! read-out noise factor.
//!
//! Dipole matrices have ground states as rows and excited states as
//! columns. A real polarization vector e selects D^e = Σ_α e_α D^α.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::eigen::{CMatrix, EigenSystem};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_ground, ground_spin_operator, EXCITED_BASIS, GROUND_BASIS};
use crate::model::{lab_field_to_nv, DjtParams, NvOrientation, PhysicalConstants, StrainNV};

#[derive(Debug, Clone, PartialEq)]
pub struct DipoleSet {
    pub dx: CMatrix,
    pub dy: CMatrix,
    pub dz: CMatrix,
    pub ground_basis: &'static str,
    pub excited_basis: &'static str,
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Neutral NV: Ex couples to x̂, Ey to ŷ, spin conserved, no ẑ dipole.
pub fn dipole_set_nv0(consts: &PhysicalConstants) -> DipoleSet {
    let g = consts.d_ge / 2f64.sqrt();
    let mut dx = CMatrix::zeros(4, 2);
    let mut dy = CMatrix::zeros(4, 2);
    // rows: Ex↑, Ex↓, Ey↑, Ey↓; columns: A1↑, A1↓
    dx[(0, 0)] = re(g);
    dx[(1, 1)] = re(g);
    dy[(2, 0)] = re(g);
    dy[(3, 1)] = re(g);
    DipoleSet { dx, dy, dz: CMatrix::zeros(4, 2), ground_basis: GROUND_BASIS, excited_basis: EXCITED_BASIS }
}

pub const NVM_GROUND_BASIS: &str = "A2_0,A2_+1,A2_-1";
pub const NVM_EXCITED_BASIS: &str = "Ex_0,Ex_+1,Ex_-1,Ey_0,Ey_+1,Ey_-1";

/// Negatively charged NV in unit dipole strength: three spin-resolved
/// V-systems, x̂ to Ex and ŷ to Ey.
pub fn dipole_set_nvm() -> DipoleSet {
    let mut dx = CMatrix::zeros(3, 6);
    let mut dy = CMatrix::zeros(3, 6);
    for s in 0..3 {
        dx[(s, s)] = re(1.0);
        dy[(s, 3 + s)] = re(1.0);
    }
    DipoleSet { dx, dy, dz: CMatrix::zeros(3, 6), ground_basis: NVM_GROUND_BASIS, excited_basis: NVM_EXCITED_BASIS }
}

impl DipoleSet {
    pub fn component(&self, alpha: usize) -> &CMatrix {
        match alpha {
            0 => &self.dx,
            1 => &self.dy,
            _ => &self.dz,
        }
    }

    /// D^e for a real polarization vector e.
    pub fn along(&self, e: [f64; 3]) -> CMatrix {
        &self.dx * re(e[0]) + &self.dy * re(e[1]) + &self.dz * re(e[2])
    }

    /// Express the dipoles between eigenstates: element (g, k) becomes
    /// ⟨g|D|k⟩ with |g⟩ a ground and |k⟩ an excited eigenvector.
    pub fn in_eigenbases(&self, ground: &EigenSystem, excited: &EigenSystem) -> Result<DipoleSet> {
        let (n, m) = (self.dx.nrows(), self.dx.ncols());
        if ground.dim() != n || excited.dim() != m {
            return Err(Error::DimensionMismatch(format!(
                "dipoles are {n}x{m}, eigensystems are {} and {}",
                ground.dim(),
                excited.dim()
            )));
        }
        let u = ground.vectors.adjoint();
        let v = &excited.vectors;
        Ok(DipoleSet {
            dx: &u * &self.dx * v,
            dy: &u * &self.dy * v,
            dz: &u * &self.dz * v,
            ground_basis: "eigen",
            excited_basis: "eigen",
        })
    }

    fn check_shapes(&self) -> Result<()> {
        let s = (self.dx.nrows(), self.dx.ncols());
        if (self.dy.nrows(), self.dy.ncols()) != s || (self.dz.nrows(), self.dz.ncols()) != s {
            return Err(Error::DimensionMismatch("dx, dy, dz differ in shape".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForcReport {
    /// True when every D^β D^α† is a multiple of the identity.
    pub holds: bool,
    pub max_offdiag: f64,
    pub diag_spread: f64,
    /// a_βα as (re, im), row β, column α; the mean diagonal of each product.
    pub coefficients: [[(f64, f64); 3]; 3],
}

/// Check whether the leading 1/Δ̄ Raman term vanishes for every ground pair:
/// this happens iff D^β D^α† = a_βα·I for all nine polarization pairs.
#[allow(clippy::needless_range_loop)]
pub fn forc_condition(ds: &DipoleSet) -> Result<ForcReport> {
    ds.check_shapes()?;
    let n = ds.dx.nrows();
    let mut max_offdiag: f64 = 0.0;
    let mut diag_spread: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut coefficients = [[(0.0, 0.0); 3]; 3];
    for beta in 0..3 {
        for alpha in 0..3 {
            let p = ds.component(beta) * ds.component(alpha).adjoint();
            let mean = (0..n).map(|i| p[(i, i)]).sum::<C64>() / re(n as f64);
            coefficients[beta][alpha] = (mean.re, mean.im);
            for i in 0..n {
                for j in 0..n {
                    scale = scale.max(p[(i, j)].norm());
                    if i == j {
                        diag_spread = diag_spread.max((p[(i, i)] - mean).norm());
                    } else {
                        max_offdiag = max_offdiag.max(p[(i, j)].norm());
                    }
                }
            }
        }
    }
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    Ok(ForcReport { holds: max_offdiag <= tol && diag_spread <= tol, max_offdiag, diag_spread, coefficients })
}

/// Raman coefficient between ground states f and i through every excited
/// state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanResult {
    /// R·Δ̄ = Σ_k D^control_fk D^signal*_ik (GHz²·µm²/V²).
    pub r_times_delta: C64,
    /// Σ_k D^control_fk D^signal*_ik / (Δ̄ + ς_k).
    pub r_exact: C64,
    /// The two-term expansion R·Δ̄/Δ̄ − Σ_k (...)ς_k/Δ̄².
    pub r_expansion: C64,
    /// Δ̄ in GHz, measured from the mean excited energy.
    pub detuning: f64,
}

/// Raman coefficient between ground eigenstates `f` (coupled by the control)
/// and `i` (coupled by the signal).
#[allow(clippy::too_many_arguments)]
pub fn raman_between(
    ground: &EigenSystem,
    f: usize,
    i: usize,
    excited: &EigenSystem,
    ds: &DipoleSet,
    pol_signal: [f64; 3],
    pol_control: [f64; 3],
    detuning: f64,
) -> Result<RamanResult> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::ZeroDetuning);
    }
    if f >= ground.dim() || i >= ground.dim() {
        return Err(Error::InvalidInput("ground index out of range".into()));
    }
    let d = ds.in_eigenbases(ground, excited)?;
    let dc = d.along(pol_control);
    let dsig = d.along(pol_signal);
    let mean = excited.values.iter().sum::<f64>() / excited.dim() as f64;
    let mut lead = re(0.0);
    let mut exact = re(0.0);
    let mut corr = re(0.0);
    for k in 0..excited.dim() {
        let varsigma = excited.values[k] - mean;
        let num = dc[(f, k)] * dsig[(i, k)].conj();
        lead += num;
        exact += num / re(detuning + varsigma);
        corr += num * re(varsigma);
    }
    Ok(RamanResult {
        r_times_delta: lead,
        r_exact: exact,
        r_expansion: lead / re(detuning) - corr / re(detuning * detuning),
        detuning,
    })
}

/// Raman coefficient of the Λ system: from the upper ground doublet (signal)
/// to the same-spin state of the lower doublet (control).
///
/// `ground` must have two doublets, lower first, as produced by
/// [`crate::hamiltonian::GroundHamiltonian::eigensystem`].
pub fn raman_coupling(
    ground: &EigenSystem,
    excited: &EigenSystem,
    ds: &DipoleSet,
    pol_signal: [f64; 3],
    pol_control: [f64; 3],
    detuning: f64,
) -> Result<RamanResult> {
    let (f, i) = lambda_pair(ground)?;
    raman_between(ground, f, i, excited, ds, pol_signal, pol_control, detuning)
}

/// Indices (f, i): the first lower-doublet state and the upper-doublet state
/// with the largest spin overlap with it.
pub fn lambda_pair(ground: &EigenSystem) -> Result<(usize, usize)> {
    let (lower, upper) = doublets(ground)?;
    let sz = ground_spin_operator();
    if sz.nrows() != ground.dim() {
        return Err(Error::DimensionMismatch("spin operator needs the 4-state ground basis".into()));
    }
    let spin = |k: usize| {
        let v = ground.vector(k);
        (v.adjoint() * &sz * &v)[(0, 0)].re
    };
    let f = lower.start;
    let sf = spin(f);
    let i = upper.clone().max_by(|&a, &b| (spin(a) * sf).total_cmp(&(spin(b) * sf)).then(b.cmp(&a))).unwrap();
    Ok((f, i))
}

fn doublets(ground: &EigenSystem) -> Result<(std::ops::Range<usize>, std::ops::Range<usize>)> {
    let c = ground.clusters();
    if c.len() < 2 {
        let spread = ground.values.last().unwrap_or(&0.0) - ground.values.first().unwrap_or(&0.0);
        return Err(Error::DegenerateGround { splitting: spread });
    }
    Ok((c[0].clone(), c[c.len() - 1].clone()))
}

/// Which ground doublet a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Doublet {
    Lower,
    Upper,
}

fn absorption(state: &DVector<C64>, d: &CMatrix) -> f64 {
    // amplitudes ⟨ψ|D|k⟩ for every excited basis state k
    (state.adjoint() * d).iter().map(|z| z.norm_sqr()).sum()
}

fn degree(pa: f64, pb: f64) -> Result<f64> {
    let total = pa + pb;
    if total <= 1e-300 {
        return Err(Error::UndefinedPolarization);
    }
    Ok((pa - pb) / total)
}

/// Linear polarization degree (P_a − P_b)/(P_a + P_b) of absorption from a
/// normalized ground state, summed over excited states. Axes are given in
/// the same frame as the dipoles.
pub fn polarization_degree(state: &DVector<C64>, excited: &EigenSystem, ds: &DipoleSet, axis_a: [f64; 3], axis_b: [f64; 3]) -> Result<f64> {
    let n = state.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("state must be normalized, norm = {n}")));
    }
    let da = ds.along(axis_a) * &excited.vectors;
    let db = ds.along(axis_b) * &excited.vectors;
    degree(absorption(state, &da), absorption(state, &db))
}

/// Absorption probabilities (P_a, P_b) of a whole doublet, both spin states
/// summed.
pub fn doublet_absorption(ground: &EigenSystem, which: Doublet, ds: &DipoleSet, axis_a: [f64; 3], axis_b: [f64; 3]) -> Result<(f64, f64)> {
    let (lower, upper) = doublets(ground)?;
    let range = if which == Doublet::Lower { lower } else { upper };
    let da = ds.along(axis_a);
    let db = ds.along(axis_b);
    let mut pa = 0.0;
    let mut pb = 0.0;
    for k in range {
        let v = ground.vector(k);
        pa += absorption(&v, &da);
        pb += absorption(&v, &db);
    }
    Ok((pa, pb))
}

/// Polarization degree of a whole doublet (both spin states summed), which
/// does not depend on how the degenerate pair is chosen.
pub fn doublet_polarization_degree(ground: &EigenSystem, which: Doublet, ds: &DipoleSet, axis_a: [f64; 3], axis_b: [f64; 3]) -> Result<f64> {
    let (pa, pb) = doublet_absorption(ground, which, ds, axis_a, axis_b)?;
    degree(pa, pb)
}

/// Degree from summed absorption probabilities.
pub fn degree_from_probabilities(pa: f64, pb: f64) -> Result<f64> {
    degree(pa, pb)
}

/// Coupling probability of one NV, split into the part landing on the upper
/// doublet and the total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrientationNoise {
    pub label: String,
    pub upper: f64,
    pub total: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseFactor {
    /// Relative probability that the control couples to the upper doublet.
    pub p: f64,
    pub per_orientation: Vec<OrientationNoise>,
}

fn coupling_split(ground: &EigenSystem, ds: &DipoleSet, control_pol: [f64; 3]) -> Result<(f64, f64)> {
    let (_, upper) = doublets(ground)?;
    if ds.dx.nrows() != ground.dim() {
        return Err(Error::DimensionMismatch("dipole rows vs ground dimension".into()));
    }
    let d = ds.along(control_pol);
    let mut up = 0.0;
    let mut total = 0.0;
    for k in 0..ground.dim() {
        let w = absorption(&ground.vector(k), &d);
        total += w;
        if upper.contains(&k) {
            up += w;
        }
    }
    if total <= 0.0 {
        return Err(Error::InvalidInput("control polarization does not couple to the ground manifold".into()));
    }
    Ok((up, total))
}

/// Exact noise factor of a single NV from its eigenvectors.
pub fn noise_suppression(ground: &EigenSystem, ds: &DipoleSet, control_pol: [f64; 3]) -> Result<NoiseFactor> {
    let (up, total) = coupling_split(ground, ds, control_pol)?;
    let p = up / total;
    Ok(NoiseFactor { p, per_orientation: vec![OrientationNoise { label: "single".into(), upper: up, total, p }] })
}

/// Perturbative noise factor (λ∥² + 4Υy²)/(4(S − 2Υx)²).
pub fn noise_suppression_approx(s: f64, djt: &DjtParams, consts: &PhysicalConstants) -> f64 {
    let l = consts.lambda_par;
    let uy = djt.upsilon_y();
    let den = s - 2.0 * djt.upsilon_x();
    (l * l + 4.0 * uy * uy) / (4.0 * den * den)
}

/// Noise factor of an ensemble containing the given orientations in equal
/// numbers: coupling probabilities are summed before normalizing.
pub fn ensemble_noise(
    field_lab: [f64; 3],
    orientations: &[NvOrientation],
    djt: &DjtParams,
    strain: &StrainNV,
    consts: &PhysicalConstants,
    control_pol_lab: [f64; 3],
) -> Result<NoiseFactor> {
    if orientations.is_empty() {
        return Err(Error::InvalidInput("no orientations given".into()));
    }
    let ds = dipole_set_nv0(consts);
    let mut parts = Vec::with_capacity(orientations.len());
    for o in orientations {
        let field = lab_field_to_nv(field_lab, o);
        let ground = build_ground(djt, &field, strain, consts).eigensystem();
        let (up, total) = coupling_split(&ground, &ds, o.to_nv(control_pol_lab))?;
        parts.push(OrientationNoise { label: o.label.into(), upper: up, total, p: up / total });
    }
    let up: f64 = parts.iter().map(|x| x.upper).sum();
    let total: f64 = parts.iter().map(|x| x.total).sum();
    Ok(NoiseFactor { p: up / total, per_orientation: parts })
}

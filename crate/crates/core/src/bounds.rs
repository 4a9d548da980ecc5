//! Explicit comparison operators `L₋(P) ≤ H(|P|u) ≤ L₊(P)`, min-max counting,
//! closed-form energy envelopes, gap margins and the auxiliary operator
//! inequalities they rest on. `u = (1, 0, 0)` throughout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::FiberModel;
use crate::linalg::{self, c, kron_identity, real_diagonal, symmetrize};
use crate::modes::CouplingNorms;
use crate::params::ModelParams;
use crate::spectral::{low_spectrum, SpectralOptions};
use crate::{CMat, Vec3, C64};

/// Constants of the comparison operators, all linear in `e` (except
/// `e²C₄`, quadratic).
///
/// * `eC₁ = eC₂ = γ(‖ω^{-1/2}F₀,₁‖ + (3π/M)‖(1+ω^{-1/2})|k||F₀|‖)`
/// * `eC₃ = ‖ω^{-1/2}|F₀|‖`, `e²C₄ = 2‖(1+ω^{-1/2})|F₀|‖² + ‖|k|^{1/2}|F₀|‖²`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub gamma: f64,
    pub mass: f64,
    pub photon_mass: f64,
    pub ec1: f64,
    pub ec2: f64,
    pub ec3: f64,
    pub e2c4: f64,
}

impl BoundConstants {
    pub fn new(norms: &CouplingNorms, params: &ModelParams) -> Self {
        let g = params.gamma;
        let spin = 3.0 * std::f64::consts::PI / params.mass * norms.n_curl;
        let ec1 = g * (norms.n_half_component[0] + spin);
        BoundConstants {
            gamma: g,
            mass: params.mass,
            photon_mass: params.photon_mass,
            ec1,
            ec2: ec1,
            ec3: norms.n_half,
            e2c4: 2.0 * norms.n_one * norms.n_one + norms.n_kin * norms.n_kin,
        }
    }

    pub fn from_model(model: &FiberModel) -> Self {
        Self::new(model.norms(), model.params())
    }

    fn rest(&self, p_abs: f64) -> f64 {
        self.gamma * (p_abs * p_abs + self.mass * self.mass).sqrt()
    }

    /// `Σ₋(P) = γ√(P²+M²) + (1−γ−eC₁)m_ph − eC₂`.
    pub fn sigma_minus(&self, p_abs: f64) -> f64 {
        self.rest(p_abs) + (1.0 - self.gamma - self.ec1) * self.photon_mass - self.ec2
    }

    /// `γ√(P²+M²) − eC₂` and `γ√((|P|+eC₃)²+M²+e²C₄)`.
    pub fn corollary_energy_bounds(&self, p_abs: f64) -> (f64, f64) {
        let upper = self.gamma * ((p_abs + self.ec3).powi(2) + self.mass * self.mass + self.e2c4).sqrt();
        (self.rest(p_abs) - self.ec2, upper)
    }

    /// `eĉ = eC₂ + γ(eC₃ + √(M²+e²C₄) − M)`: the envelope width
    /// `upper − γ√(P²+M²) + eC₂` bounded uniformly in `P`. Both gap
    /// margins below lose at most this much against `(1−γ)m_ph`.
    pub fn gap_erosion(&self) -> f64 {
        let m = self.mass;
        self.ec2 + self.gamma * (self.ec3 + (m * m + self.e2c4).sqrt() - m)
    }

    /// `(1 − eC₁ − γ)m_ph − eC₂`.
    pub fn excitation_floor(&self) -> f64 {
        (1.0 - self.ec1 - self.gamma) * self.photon_mass - self.ec2
    }
}

/// Diagonal of `γ√(P²+M²) + (1−γ−eC₁)H_f − eC₂` on one spin copy.
pub fn l_minus_diag(model: &FiberModel, p_abs: f64, consts: &BoundConstants) -> Result<Vec<f64>> {
    if !(consts.gamma < 1.0) {
        return Err(Error::InvalidParams("lower comparison operator needs gamma < 1".into()));
    }
    let base = consts.rest(p_abs) - consts.ec2;
    let slope = 1.0 - consts.gamma - consts.ec1;
    Ok(model.h_f().iter().map(|h| base + slope * h).collect())
}

/// `L₋(P) ⊗ Id₂`.
pub fn build_l_minus(model: &FiberModel, p_abs: f64, consts: &BoundConstants) -> Result<CMat> {
    Ok(kron_identity(2, &real_diagonal(&l_minus_diag(model, p_abs, consts)?)))
}

/// Diagonal of `L₊(P)` on one spin copy: every constituent is a function of
/// the occupation numbers, so
///
/// ```text
/// L₊ = γ[(|P|u − P_f)² + 2|P|(H_f + n½) + 4(H_f+1)P_f² + n₁² + n₁²(H_f+1)
///        + H_f + n_k² + M²]^{1/2} + H_f
/// ```
///
/// with `n½ = ‖ω^{-1/2}|F₀|‖`, `n₁ = ‖(1+ω^{-1/2})|F₀|‖`, `n_k = ‖|k|^{1/2}|F₀|‖`.
pub fn l_plus_diag(model: &FiberModel, p_abs: f64) -> Result<Vec<f64>> {
    let n = model.norms();
    let prm = model.params();
    let pf = model.p_f();
    let n1 = n.n_one * n.n_one;
    let mut out = Vec::with_capacity(model.dim());
    for (i, &hf) in model.h_f().iter().enumerate() {
        let (p1, p2, p3) = (pf[0][i], pf[1][i], pf[2][i]);
        let pf2 = p1 * p1 + p2 * p2 + p3 * p3;
        let rad = (p_abs - p1).powi(2) + p2 * p2 + p3 * p3
            + 2.0 * p_abs * (hf + n.n_half)
            + 4.0 * (hf + 1.0) * pf2
            + n1
            + n1 * (hf + 1.0)
            + hf
            + n.n_kin * n.n_kin
            + prm.mass * prm.mass;
        if rad < 0.0 {
            return Err(Error::NegativeRadicand { value: rad });
        }
        out.push(prm.gamma * rad.sqrt() + hf);
    }
    Ok(out)
}

/// `L₊(P) ⊗ Id₂`.
pub fn build_l_plus(model: &FiberModel, p_abs: f64) -> Result<CMat> {
    Ok(kron_identity(2, &real_diagonal(&l_plus_diag(model, p_abs)?)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeqCheck {
    pub holds: bool,
    /// Smallest eigenvalue of `B − A`.
    pub min_eig: f64,
    /// `max(‖A‖, ‖B‖)`, the scale the tolerance is relative to.
    pub scale: f64,
}

/// `A ≤ B` iff `min eig(B − A) ≥ −tol·max(‖A‖, ‖B‖)`.
pub fn check_op_leq(a: &CMat, b: &CMat, tol: f64) -> Result<LeqCheck> {
    if a.shape() != b.shape() {
        return Err(Error::DimMismatch { expected: a.nrows(), got: b.nrows() });
    }
    let scale = linalg::hermitian_norm(a)?.max(linalg::hermitian_norm(b)?);
    let min_eig = linalg::min_eigenvalue(&(b - a))?;
    Ok(LeqCheck { holds: min_eig >= -tol * scale, min_eig, scale })
}

/// Number of eigenvalues strictly below `threshold`.
pub fn count_below(h: &CMat, threshold: f64) -> Result<usize> {
    Ok(linalg::eigvalsh(h)?.iter().filter(|&&v| v < threshold).count())
}

/// [`count_below`], switching to the iterative solver above the dense limit.
pub fn count_below_with(h: &CMat, threshold: f64, opts: &SpectralOptions) -> Result<usize> {
    let n = h.nrows();
    if n <= opts.dense_limit {
        return count_below(h, threshold);
    }
    let mut m = opts.initial_count.max(2);
    loop {
        let (vals, _) = low_spectrum(h, m.min(n), opts)?;
        let below = vals.iter().filter(|&&v| v < threshold).count();
        if below < vals.len() || m >= n {
            return Ok(below);
        }
        if m >= opts.max_count {
            return Err(Error::SpectrumExhausted { computed: m });
        }
        m *= 2;
    }
}

/// Gap margins at one `P`: positive numbers mean the inequality holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    /// `Δ(P) − [(1−γ)m_ph − eĉ]`.
    pub delta_margin: f64,
    /// `(E₁−E) − [(1−eC₁−γ)m_ph − eĉ]`.
    pub excitation_margin: f64,
    /// `(E₁−E) − (Σ₋(P) − upper(P))`.
    pub chain_margin: f64,
    /// `(E₁−E) − [(1−eC₁−γ)m_ph − eC₂]`.
    pub floor_margin: f64,
    pub hypotheses_met: bool,
}

pub fn theorem_gap_report(p_abs: f64, e: f64, e1: f64, delta: f64, consts: &BoundConstants) -> GapReport {
    let erosion = consts.gap_erosion();
    let (_, upper) = consts.corollary_energy_bounds(p_abs);
    let gap = e1 - e;
    GapReport {
        delta_margin: delta - ((1.0 - consts.gamma) * consts.photon_mass - erosion),
        excitation_margin: gap - ((1.0 - consts.ec1 - consts.gamma) * consts.photon_mass - erosion),
        chain_margin: gap - (consts.sigma_minus(p_abs) - upper),
        floor_margin: gap - consts.excitation_floor(),
        hypotheses_met: consts.gamma < 1.0 && consts.photon_mass > 0.0,
    }
}

/// `H_SL(|P|u) − [γ√(P²+M²) + (1−γ−eC)H_f − eC]` with `eC = γ‖ω^{-1/2}F₀,₁‖`;
/// returns its smallest eigenvalue.
pub fn spinless_lower_min_eig(model: &FiberModel, p_abs: f64) -> Result<f64> {
    let prm = model.params();
    let ec = prm.gamma * model.norms().n_half_component[0];
    let rest = prm.gamma * (p_abs * p_abs + prm.mass * prm.mass).sqrt();
    let sl = model.h_spinless(&Vec3::new(p_abs, 0.0, 0.0))?.into_matrix();
    let bound: Vec<f64> = model.h_f().iter().map(|h| rest + (1.0 - prm.gamma - ec) * h - ec).collect();
    linalg::min_eigenvalue(&(sl - real_diagonal(&bound)))
}

/// Smallest eigenvalues of `κ(H_f+1) ∓ (H_SL⊗Id₂ − H(|P|u))` for
/// `κ = (3π/M)‖(1+ω^{-1/2})|k||F₀|‖` and for `γκ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinDifferenceCheck {
    pub min_eig_plain: f64,
    pub min_eig_scaled: f64,
}

pub fn spin_difference_check(model: &FiberModel, p_abs: f64) -> Result<SpinDifferenceCheck> {
    let prm = model.params();
    let pu = Vec3::new(p_abs, 0.0, 0.0);
    let diff = kron_identity(2, model.h_spinless(&pu)?.matrix()) - model.h(&pu)?.into_matrix();
    let kappa = 3.0 * std::f64::consts::PI / prm.mass * model.norms().n_curl;
    let hf1: Vec<f64> = model.h_f().iter().map(|h| h + 1.0).collect();
    let weight = kron_identity(2, &real_diagonal(&hf1));
    let side = |k: f64| -> Result<f64> {
        let w = &weight * c(k);
        Ok(linalg::min_eigenvalue(&(&w - &diff))?.min(linalg::min_eigenvalue(&(&w + &diff))?))
    };
    Ok(SpinDifferenceCheck { min_eig_plain: side(kappa)?, min_eig_scaled: side(prm.gamma * kappa)? })
}

/// Smallest eigenvalue of the Taylor remainder
/// `f(|P| − X) − f(|P|) + f′(|P|)X`, `f(s) = √(s² + M²)`, `X = P_f,₁ − A(0)₁`.
pub fn taylor_remainder_min_eig(model: &FiberModel, p_abs: f64) -> Result<f64> {
    let m2 = model.params().mass.powi(2);
    let f = |s: f64| (s * s + m2).sqrt();
    let fp = p_abs / f(p_abs);
    let x = -model.field_shift(0);
    let rem = linalg::hermitian_function(&x, |l| f(p_abs - l) - f(p_abs) + fp * l)?;
    linalg::min_eigenvalue(&rem)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub trials: usize,
    pub violations: usize,
    /// Smallest `min eig(√T − √S)/‖√T‖` seen.
    pub worst_margin: f64,
}

impl MonotoneReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Draws PSD `S` and `T = S + W†W` (with `W` of random rank) and checks
/// `√T − √S ≥ −1e-10‖√T‖`.
pub fn sqrt_monotone_test(dim: usize, trials: usize, seed: u64) -> Result<MonotoneReport> {
    if dim == 0 || dim > 32 {
        return Err(Error::InvalidParams("monotonicity test dimension must lie in 1..=32".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..trials {
        let x = random_matrix(&mut rng, dim, dim);
        // shifted away from singular: √ near a zero eigenvalue magnifies
        // roundoff to √ε, far above the tested tolerance
        let shift = rng.gen_range(0.05..1.0);
        let s = symmetrize(&(&x * x.adjoint() + CMat::identity(dim, dim) * c(shift)));
        let rank = rng.gen_range(1..=dim);
        let w = random_matrix(&mut rng, rank, dim) * c(10f64.powf(rng.gen_range(-3.0..0.5)));
        let t = symmetrize(&(&s + w.adjoint() * &w));
        let (rs, rt) = (linalg::sqrt_psd(&s)?, linalg::sqrt_psd(&t)?);
        let margin = linalg::min_eigenvalue(&(&rt - &rs))? / linalg::hermitian_norm(&rt)?;
        worst = worst.min(margin);
        if margin < -1e-10 {
            violations += 1;
        }
    }
    Ok(MonotoneReport { trials, violations, worst_margin: worst })
}

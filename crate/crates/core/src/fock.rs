//! Truncated bosonic Fock space in the occupation-number basis.
//!
//! States are occupation vectors `(n₁, …, n_M)` with `Σ nᵢ ≤ N_max`, ordered
//! graded-lexicographically: sector by sector in increasing photon number,
//! and inside a sector by descending occupation of the first mode, then the
//! second, and so on. The vacuum is index 0, sectors are contiguous, and the
//! basis for `N_max` is a prefix of the basis for `N_max + 1`.
//!
//! Ladder operators are compressions: creation out of the top sector maps to
//! zero, so `[a_m, a_m†] = 1` only holds below the top sector.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::{CMat, CVec, C64};

/// Default cap on the number of occupation states.
pub const DEFAULT_DIM_LIMIT: usize = 500_000;

#[derive(Debug, Clone)]
pub struct FockBasis {
    n_modes: usize,
    n_max: usize,
    /// Occupations, `n_modes` entries per state.
    occ: Vec<u16>,
    /// `sector_start[n]` is the first index of the `n`-photon sector; the last
    /// entry is the dimension.
    sector_start: Vec<usize>,
    index: HashMap<Box<[u16]>, usize>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// `Σ_{n ≤ N} C(M + n − 1, n)`, or `None` on overflow.
pub fn basis_dimension(n_modes: usize, n_max: usize) -> Option<usize> {
    (0..=n_max).try_fold(0usize, |acc, n| acc.checked_add(binomial(n_modes + n - 1, n)?))
}

fn push_compositions(total: usize, slots: usize, prefix: &mut Vec<u16>, out: &mut Vec<u16>) {
    if slots == 1 {
        prefix.push(total as u16);
        out.extend_from_slice(prefix);
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first as u16);
        push_compositions(total - first, slots - 1, prefix, out);
        prefix.pop();
    }
}

impl FockBasis {
    pub fn enumerate(n_modes: usize, n_max: usize) -> Result<Self> {
        Self::enumerate_with_limit(n_modes, n_max, DEFAULT_DIM_LIMIT)
    }

    pub fn enumerate_with_limit(n_modes: usize, n_max: usize, limit: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidParams("Fock basis needs at least one mode".into()));
        }
        if n_max > u16::MAX as usize {
            return Err(Error::InvalidParams("photon cutoff too large".into()));
        }
        let dim = basis_dimension(n_modes, n_max).unwrap_or(usize::MAX);
        if dim > limit {
            return Err(Error::DimensionLimit { dim, limit });
        }
        let mut occ = Vec::with_capacity(dim * n_modes);
        let mut sector_start = Vec::with_capacity(n_max + 2);
        let mut prefix = Vec::with_capacity(n_modes);
        for n in 0..=n_max {
            sector_start.push(occ.len() / n_modes);
            push_compositions(n, n_modes, &mut prefix, &mut occ);
        }
        sector_start.push(occ.len() / n_modes);
        debug_assert_eq!(occ.len(), dim * n_modes);
        let index = occ
            .chunks_exact(n_modes)
            .enumerate()
            .map(|(i, s)| (s.to_vec().into_boxed_slice(), i))
            .collect();
        Ok(FockBasis { n_modes, n_max, occ, sector_start, index })
    }

    pub fn dim(&self) -> usize {
        self.sector_start[self.n_max + 1]
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn state(&self, i: usize) -> &[u16] {
        &self.occ[i * self.n_modes..(i + 1) * self.n_modes]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u16]> {
        self.occ.chunks_exact(self.n_modes)
    }

    pub fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn photon_number(&self, i: usize) -> usize {
        self.state(i).iter().map(|&n| n as usize).sum()
    }

    /// Index range of the `n`-photon sector.
    pub fn sector(&self, n: usize) -> std::ops::Range<usize> {
        self.sector_start[n]..self.sector_start[n + 1]
    }

    /// Number of states strictly below the top sector, where the CCR hold.
    pub fn safe_dim(&self) -> usize {
        self.sector_start[self.n_max]
    }

    /// `(lower, upper, √n_m(upper))` for every pair with `upper = lower + e_m`.
    pub fn transitions(&self, m: usize) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        let mut key = vec![0u16; self.n_modes];
        for up in 0..self.dim() {
            let s = self.state(up);
            if s[m] == 0 {
                continue;
            }
            key.copy_from_slice(s);
            key[m] -= 1;
            let lo = self.index_of(&key).expect("lower state lies in the truncation");
            out.push((lo, up, (s[m] as f64).sqrt()));
        }
        out
    }
}

/// Whether an [`OperatorMatrix`] is known to be Hermitian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Hermitian,
    General,
}

/// Relative Hermiticity defect `max|H − H†| / max|H|` (0 for the zero matrix).
pub fn hermiticity_defect(m: &CMat) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst / scale
}

/// Dense operator on a finite-dimensional carrier space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMat,
    kind: OperatorKind,
}

impl OperatorMatrix {
    /// Tags `matrix` Hermitian after checking the defect is at most `1e-12`.
    pub fn hermitian(matrix: CMat) -> Result<Self> {
        let defect = hermiticity_defect(&matrix);
        if defect > 1e-12 || !matrix.is_square() {
            return Err(Error::NotHermitian { defect });
        }
        Ok(OperatorMatrix { matrix, kind: OperatorKind::Hermitian })
    }

    pub fn general(matrix: CMat) -> Self {
        OperatorMatrix { matrix, kind: OperatorKind::General }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        OperatorMatrix { matrix: self.matrix.adjoint(), kind: self.kind }
    }
}

/// Annihilator `a_m` on the truncated basis.
pub fn annihilator(basis: &FockBasis, m: usize) -> Result<OperatorMatrix> {
    if m >= basis.n_modes() {
        return Err(Error::ModeIndex { index: m, n_modes: basis.n_modes() });
    }
    let mut a = CMat::zeros(basis.dim(), basis.dim());
    for (lo, up, amp) in basis.transitions(m) {
        a[(lo, up)] = C64::new(amp, 0.0);
    }
    Ok(OperatorMatrix::general(a))
}

/// Diagonal of `dΓ(c)`: `Σ_m c_m n_m` per state.
pub fn dgamma_diag(basis: &FockBasis, c: &[f64]) -> Vec<f64> {
    assert_eq!(c.len(), basis.n_modes(), "one scalar per mode");
    basis
        .states()
        .map(|s| s.iter().zip(c).map(|(&n, c)| n as f64 * c).sum())
        .collect()
}

/// Second quantization `dΓ(c)` of a one-photon multiplication operator.
pub fn dgamma(basis: &FockBasis, c: &[f64]) -> OperatorMatrix {
    let d = dgamma_diag(basis, c);
    let m = CMat::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|&x| C64::new(x, 0.0))));
    OperatorMatrix { matrix: m, kind: OperatorKind::Hermitian }
}

/// `Σ_m (c̄_m a_m + c_m a_m†)`; purely real when every `c_m` is real.
pub fn field_sum(basis: &FockBasis, coeffs: &[C64]) -> OperatorMatrix {
    let m = field_sum_rows(basis, coeffs, basis.dim());
    OperatorMatrix { matrix: m, kind: OperatorKind::Hermitian }
}

/// Rows `0..n_rows` of the field operator built on `basis`. With `basis`
/// one sector larger than the target truncation this is `P·φ(c)` restricted
/// to the target rows, the building block for exact compressions.
pub fn field_sum_rows(basis: &FockBasis, coeffs: &[C64], n_rows: usize) -> CMat {
    assert_eq!(coeffs.len(), basis.n_modes(), "one coefficient per mode");
    let mut out = CMat::zeros(n_rows, basis.dim());
    for (m, c) in coeffs.iter().enumerate() {
        if *c == C64::new(0.0, 0.0) {
            continue;
        }
        for (lo, up, amp) in basis.transitions(m) {
            if lo < n_rows {
                out[(lo, up)] += c.conj() * amp;
            }
            if up < n_rows {
                out[(up, lo)] += c * amp;
            }
        }
    }
    out
}

/// `Σ_m c̄_m a_m φ`.
pub fn apply_annihilation(basis: &FockBasis, coeffs: &[C64], phi: &CVec) -> CVec {
    let mut out = CVec::zeros(basis.dim());
    for (m, c) in coeffs.iter().enumerate() {
        for (lo, up, amp) in basis.transitions(m) {
            out[lo] += c.conj() * amp * phi[up];
        }
    }
    out
}

/// `Σ_m c_m a_m† φ` (compressed: contributions leaving the basis are dropped).
pub fn apply_creation(basis: &FockBasis, coeffs: &[C64], phi: &CVec) -> CVec {
    let mut out = CVec::zeros(basis.dim());
    for (m, c) in coeffs.iter().enumerate() {
        for (lo, up, amp) in basis.transitions(m) {
            out[up] += c * amp * phi[lo];
        }
    }
    out
}

/// Worst observed margin (rhs − lhs, relative to `max(1, rhs)`) per item of
/// the basic field inequalities, and the number of violations beyond the
/// tolerance.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FieldBoundReport {
    pub samples: usize,
    pub worst_margin: [f64; 5],
    pub violations: [usize; 5],
    /// Min eigenvalue of `H_f + ‖ω^{-1/2}f‖² − (a(f)+a(f)*)` on the truncation.
    pub matrix_form_min_eig: f64,
}

impl FieldBoundReport {
    pub fn passed(&self) -> bool {
        self.violations.iter().all(|&v| v == 0) && self.matrix_form_min_eig >= -1e-10
    }
}

fn random_coeffs(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale)
        .collect()
}

fn weighted_norm(coeffs: &[C64], omega: &[f64], w: impl Fn(f64) -> f64) -> f64 {
    coeffs.iter().zip(omega).map(|(c, &om)| w(om).powi(2) * c.norm_sqr()).sum::<f64>().sqrt()
}

/// Checks the basic creation/annihilation bounds on random vectors:
///
/// 1. `‖a(f)φ‖ ≤ ‖ω^{-1/2}f‖ ‖H_f^{1/2}φ‖`
/// 2. `‖a(f)*φ‖ ≤ ‖(1+ω^{-1/2})f‖ ‖(H_f+1)^{1/2}φ‖`
/// 3. `a(f)+a(f)* ≤ H_f + ‖ω^{-1/2}f‖²`
/// 4. `‖(a(f)+a(f)*)φ‖ ≤ 2‖(1+ω^{-1/2})f‖ ‖(H_f+1)^{1/2}φ‖`
/// 5. `|⟨φ, a(f)^# a(g)^# φ⟩| ≤ ‖(1+ω^{-1/2})f‖ ‖(1+ω^{-1/2})g‖ ⟨φ, (H_f+1)φ⟩`
///
/// Vectors live on the `N_max` truncation and operators act on the basis one
/// sector larger, so every application is exact (truncation-safe).
pub fn field_bound_suite(omega: &[f64], n_max: usize, samples: usize, seed: u64) -> Result<FieldBoundReport> {
    const TOL: f64 = 1e-10;
    let n_modes = omega.len();
    let ext = FockBasis::enumerate(n_modes, n_max + 1)?;
    let dim = basis_dimension(n_modes, n_max).expect("smaller than ext");
    let hf = dgamma_diag(&ext, omega);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let inner = |x: &CVec, y: &CVec| x.dotc(y);
    let mut worst = [f64::INFINITY; 5];
    let mut violations = [0usize; 5];
    let mut record = |item: usize, lhs: f64, rhs: f64| {
        let margin = (rhs - lhs) / rhs.max(1.0);
        worst[item] = worst[item].min(margin);
        if margin < -TOL {
            violations[item] += 1;
        }
    };

    for _ in 0..samples {
        let scale = 10f64.powf(rng.gen_range(-2.0..0.5));
        let f = random_coeffs(&mut rng, n_modes, scale);
        let g = random_coeffs(&mut rng, n_modes, scale);
        let mut phi = CVec::zeros(ext.dim());
        for i in 0..dim {
            phi[i] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        let hf_form: f64 = (0..dim).map(|i| hf[i] * phi[i].norm_sqr()).sum();
        let norm2 = phi.norm_squared();
        let hf1_form = hf_form + norm2;

        let nf_half = weighted_norm(&f, omega, |w| w.powf(-0.5));
        let nf_one = weighted_norm(&f, omega, |w| 1.0 + w.powf(-0.5));
        let ng_one = weighted_norm(&g, omega, |w| 1.0 + w.powf(-0.5));

        let af = apply_annihilation(&ext, &f, &phi);
        let cf = apply_creation(&ext, &f, &phi);
        record(0, af.norm(), nf_half * hf_form.sqrt());
        record(1, cf.norm(), nf_one * hf1_form.sqrt());
        let field = &af + &cf;
        record(2, inner(&phi, &field).re, hf_form + nf_half * nf_half * norm2);
        record(3, field.norm(), 2.0 * nf_one * hf1_form.sqrt());

        // ⟨φ, X Y φ⟩ = ⟨X* φ, Y φ⟩, each factor applied once and exactly
        let ag = apply_annihilation(&ext, &g, &phi);
        let cg = apply_creation(&ext, &g, &phi);
        let bound5 = nf_one * ng_one * hf1_form;
        for (x_adj_phi, y_phi) in [(&cf, &ag), (&cf, &cg), (&af, &ag), (&af, &cg)] {
            record(4, inner(x_adj_phi, y_phi).norm(), bound5);
        }
    }

    // item 3 as a matrix inequality on the truncation itself
    let basis = FockBasis::enumerate(n_modes, n_max)?;
    let f = random_coeffs(&mut rng, n_modes, 0.5);
    let nf_half = weighted_norm(&f, omega, |w| w.powf(-0.5));
    let mut diff = -field_sum(&basis, &f).into_matrix();
    for (i, h) in dgamma_diag(&basis, omega).into_iter().enumerate() {
        diff[(i, i)] += C64::new(h + nf_half * nf_half, 0.0);
    }
    let matrix_form_min_eig = crate::linalg::eigvalsh(&diff)?[0];

    Ok(FieldBoundReport { samples, worst_margin: worst, violations, matrix_form_min_eig })
}

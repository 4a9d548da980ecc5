//! Dense Hermitian linear algebra: sorted eigensolves, matrix square roots,
//! Kronecker products with spin matrices, and a block Krylov solver for the
//! low end of large spectra.

use nalgebra::{Cholesky, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{hermiticity_defect, OperatorMatrix};
use crate::{CMat, CVec, C64};

/// Relative tolerance below which negative eigenvalues count as roundoff.
pub const TOL_PSD: f64 = 1e-10;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `(A + A†)/2`.
pub fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()) * c(0.5)
}

/// Eigenvalues ascending with matching orthonormal eigenvector columns.
pub fn eigh(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !m.is_square() {
        return Err(Error::DimMismatch { expected: m.nrows(), got: m.ncols() });
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver("non-finite matrix entry".into()));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// Eigenvalues ascending.
pub fn eigvalsh(m: &CMat) -> Result<Vec<f64>> {
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver("non-finite matrix entry".into()));
    }
    let mut v: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn min_eigenvalue(m: &CMat) -> Result<f64> {
    Ok(eigvalsh(m)?.first().copied().unwrap_or(0.0))
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMat) -> Result<f64> {
    let v = eigvalsh(m)?;
    Ok(v.first().map_or(0.0, |lo| lo.abs().max(v[v.len() - 1].abs())))
}

/// Largest singular value of an arbitrary matrix.
pub fn spectral_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// `f(H)` by spectral decomposition.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    Ok(apply_spectral(&vals, &vecs, f))
}

fn apply_spectral(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let fl = c(f(l));
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= fl);
    }
    symmetrize(&(scaled * vecs.adjoint()))
}

/// Reference square root by eigendecomposition. Eigenvalues down to
/// `−TOL_PSD·‖H‖` are clamped to zero; anything below is rejected.
pub fn op_sqrt_eig(h: &OperatorMatrix) -> Result<OperatorMatrix> {
    OperatorMatrix::hermitian(sqrt_psd(h.matrix())?)
}

/// [`op_sqrt_eig`] on a bare matrix (symmetrized first).
pub fn sqrt_psd(m: &CMat) -> Result<CMat> {
    let (vals, vecs) = eigh(m)?;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let threshold = -TOL_PSD * scale;
    if let Some(&lo) = vals.first() {
        if lo < threshold {
            return Err(Error::NotPositiveSemidefinite { min_eig: lo, threshold });
        }
    }
    Ok(apply_spectral(&vals, &vecs, |l| l.max(0.0).sqrt()))
}

/// Square root of a positive definite matrix from the resolvent integral
///
/// ```text
/// √X = (1/π) ∫₀^∞ t^{-1/2} X (t + X)^{-1} dt,
/// ```
///
/// rewritten with `t = c² tan²φ` (`c² = tr X / n`) as
/// `(2/π) ∫₀^{π/2} c X (c² sin²φ + X cos²φ)^{-1} dφ`. The integrand is smooth
/// and even-periodic, so nested trapezoid sums converge geometrically; the
/// node count doubles until successive sums differ by at most `tol/10`
/// entrywise.
pub fn op_sqrt_quad(h: &OperatorMatrix, tol: f64) -> Result<OperatorMatrix> {
    OperatorMatrix::hermitian(sqrt_pd_quad(h.matrix(), tol)?)
}

pub fn sqrt_pd_quad(x: &CMat, tol: f64) -> Result<CMat> {
    const MAX_INTERVALS: usize = 1 << 16;
    let n = x.nrows();
    let x = symmetrize(x);
    if n == 0 {
        return Ok(x);
    }
    if min_eigenvalue(&x)? <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let cc = (x.trace().re / n as f64).sqrt();
    let id = CMat::identity(n, n);
    let integrand = |phi: f64| -> Result<CMat> {
        let (s, co) = phi.sin_cos();
        let shifted = &id * c(cc * cc * s * s) + &x * c(co * co);
        // X and the shifted matrix commute, so X·K⁻¹ = K⁻¹·X
        let chol = Cholesky::new(shifted).ok_or(Error::NotPositiveDefinite)?;
        Ok(chol.solve(&x) * c(cc))
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    // trapezoid with one interval: endpoints g(0) = c·I, g(π/2) = X/c
    let mut sum = (&id * c(cc) + &x * c(1.0 / cc)) * c(0.5);
    let mut intervals = 1usize;
    let mut estimate = &sum * c(half_pi);
    loop {
        let h = half_pi / (2 * intervals) as f64;
        for i in 0..intervals {
            sum += integrand((2 * i + 1) as f64 * h)?;
        }
        intervals *= 2;
        let next = &sum * c(h);
        let change = (&next - &estimate).iter().map(|z| z.norm()).fold(0.0, f64::max);
        estimate = next;
        if change <= tol / 10.0 && intervals >= 4 {
            return Ok(symmetrize(&(estimate * c(2.0 / std::f64::consts::PI))));
        }
        if intervals >= MAX_INTERVALS {
            return Err(Error::QuadratureStalled {
                nodes: intervals + 1,
                estimate: change,
                tol,
            });
        }
    }
}

/// Pauli matrices σ₁, σ₂, σ₃ with σ₂ = [[0, −i], [i, 0]].
pub fn pauli() -> [[[C64; 2]; 2]; 3] {
    let z = c(0.0);
    let o = c(1.0);
    let i = C64::new(0.0, 1.0);
    [[[z, o], [o, z]], [[z, -i], [i, z]], [[o, z], [z, -o]]]
}

/// `s ⊗ X` for a small matrix `s` (spin index slow, `X` index fast).
pub fn kron_small(s: &CMat, x: &CMat) -> CMat {
    let (sr, sc) = s.shape();
    let (xr, xc) = x.shape();
    let mut out = CMat::zeros(sr * xr, sc * xc);
    for a in 0..sr {
        for b in 0..sc {
            let sab = s[(a, b)];
            if sab != c(0.0) {
                out.view_mut((a * xr, b * xc), (xr, xc)).copy_from(&(x * sab));
            }
        }
    }
    out
}

/// `Id_s ⊗ X`.
pub fn kron_identity(s: usize, x: &CMat) -> CMat {
    kron_small(&CMat::identity(s, s), x)
}

/// Assembles an `s×s` block matrix from row-major blocks of equal shape.
pub fn assemble_blocks(s: usize, blocks: &[CMat]) -> CMat {
    assert_eq!(blocks.len(), s * s);
    let (r, cl) = blocks[0].shape();
    let mut out = CMat::zeros(s * r, s * cl);
    for a in 0..s {
        for b in 0..s {
            out.view_mut((a * r, b * cl), (r, cl)).copy_from(&blocks[a * s + b]);
        }
    }
    out
}

/// Diagonal complex matrix from real entries.
pub fn real_diagonal(d: &[f64]) -> CMat {
    CMat::from_diagonal(&CVec::from_iterator(d.len(), d.iter().map(|&x| c(x))))
}

/// Relative Frobenius distance `‖A − B‖_F / max(‖A‖_F, ‖B‖_F)`.
pub fn relative_frobenius(a: &CMat, b: &CMat) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Checks Hermiticity to the crate-wide `1e-12` relative tolerance.
pub fn is_hermitian(m: &CMat) -> bool {
    m.is_square() && hermiticity_defect(m) <= 1e-12
}

/// Lowest `m` eigenpairs of a Hermitian matrix by block Lanczos with full
/// reorthogonalization and Rayleigh-Ritz extraction. The Krylov space grows
/// until every requested Ritz pair has residual `≤ tol·‖H‖` or the space
/// spans the whole carrier.
pub fn block_lanczos(h: &CMat, m: usize, block: usize, tol: f64, seed: u64) -> Result<(Vec<f64>, CMat)> {
    let n = h.nrows();
    if m == 0 {
        return Ok((Vec::new(), CMat::zeros(n, 0)));
    }
    let m = m.min(n);
    let block = block.max(1).min(n);
    let norm_est = h.column_iter().map(|col| col.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<CVec> = Vec::new();
    let mut images: Vec<CVec> = Vec::new();

    let push_orthonormal = |v: CVec, basis: &mut Vec<CVec>, images: &mut Vec<CVec>| -> bool {
        let mut v = v;
        for _ in 0..2 {
            for q in basis.iter() {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let nv = v.norm();
        if nv <= 1e-12 * norm_est.max(1.0) {
            return false;
        }
        v /= c(nv);
        images.push(h * &v);
        basis.push(v);
        true
    };

    let mut frontier: Vec<CVec> = (0..block)
        .map(|_| CVec::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect();
    let mut last_check = 0usize;
    loop {
        let mut next_frontier = Vec::new();
        for v in frontier.drain(..) {
            if basis.len() >= n {
                break;
            }
            if push_orthonormal(v, &mut basis, &mut images) {
                next_frontier.push(images.last().unwrap().clone());
            }
        }
        while next_frontier.len() < block && basis.len() + next_frontier.len() < n {
            // deflated direction: refill with a random vector
            next_frontier.push(CVec::from_fn(n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            }));
        }
        frontier = next_frontier;

        let k = basis.len();
        if k >= m && (k >= last_check + 4 * block || k == n || frontier.is_empty()) {
            last_check = k;
            let q = CMat::from_columns(&basis);
            let hq = CMat::from_columns(&images);
            let small = q.adjoint() * &hq;
            let (vals, vecs) = eigh(&small)?;
            let ritz = &q * vecs.columns(0, m);
            let hritz = &hq * vecs.columns(0, m);
            let converged = (0..m).all(|j| {
                let r = hritz.column(j) - ritz.column(j) * c(vals[j]);
                r.norm() <= tol * norm_est
            });
            if converged || k == n || frontier.is_empty() {
                return Ok((vals[..m].to_vec(), ritz));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        symmetrize(&a)
    }

    fn random_pd(n: usize, shift: f64, seed: u64) -> CMat {
        let a = random_hermitian(n, seed);
        &a * a.adjoint() + CMat::identity(n, n) * c(shift)
    }

    #[test]
    fn sorted_eigenpairs() {
        let m = real_diagonal(&[3.0, 1.0, 2.0]);
        let (v, vecs) = eigh(&m).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-15);
        let h = random_hermitian(9, 1);
        let (v, q) = eigh(&h).unwrap();
        let recon = &q * real_diagonal(&v) * q.adjoint();
        assert!((recon - &h).norm() < 1e-12);
        assert!((q.adjoint() * &q - CMat::identity(9, 9)).norm() < 1e-12);
    }

    #[test]
    fn sqrt_eig_examples() {
        let id = OperatorMatrix::hermitian(CMat::identity(4, 4)).unwrap();
        assert_eq!(op_sqrt_eig(&id).unwrap().matrix(), &CMat::identity(4, 4));
        let d = OperatorMatrix::hermitian(real_diagonal(&[4.0, 9.0])).unwrap();
        let r = op_sqrt_eig(&d).unwrap();
        assert!((r.matrix() - real_diagonal(&[2.0, 3.0])).norm() < 1e-14);
        let x = random_pd(10, 0.0, 3);
        let r = sqrt_psd(&x).unwrap();
        assert!(relative_frobenius(&(&r * &r), &x) < 1e-10);
    }

    #[test]
    fn sqrt_eig_clamps_roundoff_and_rejects_negative() {
        let tiny = real_diagonal(&[1.0, -1e-13]);
        assert_eq!(sqrt_psd(&tiny).unwrap()[(1, 1)], c(0.0));
        let neg = real_diagonal(&[1.0, -1e-3]);
        assert!(matches!(sqrt_psd(&neg), Err(Error::NotPositiveSemidefinite { .. })));
    }

    #[test]
    fn sqrt_quad_examples() {
        let s = sqrt_pd_quad(&real_diagonal(&[4.0]), 1e-12).unwrap();
        assert!((s[(0, 0)].re - 2.0).abs() < 1e-12);
        let s = sqrt_pd_quad(&real_diagonal(&[1.0, 25.0]), 1e-12).unwrap();
        assert!((s - real_diagonal(&[1.0, 5.0])).norm() < 1e-11);
        assert!(matches!(sqrt_pd_quad(&real_diagonal(&[1.0, -1.0]), 1e-8), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn sqrt_quad_matches_eig_on_random_pd() {
        for seed in 0..5 {
            let x = random_pd(8, 0.1, seed);
            let q = sqrt_pd_quad(&x, 1e-10).unwrap();
            let e = sqrt_psd(&x).unwrap();
            let err = (q - e).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "seed {seed}: {err}");
        }
    }

    #[test]
    fn quadrature_reports_stall() {
        // condition number 1e16 forces far more nodes than allowed
        let x = real_diagonal(&[1e-8, 1e8]);
        assert!(matches!(sqrt_pd_quad(&x, 1e-14), Err(Error::QuadratureStalled { .. })));
    }

    #[test]
    fn pauli_algebra() {
        let p = pauli();
        let m = |a: [[C64; 2]; 2]| CMat::from_fn(2, 2, |i, j| a[i][j]);
        let (s1, s2, s3) = (m(p[0]), m(p[1]), m(p[2]));
        assert_eq!(&s1 * &s2, &s3 * C64::new(0.0, 1.0));
        assert_eq!(&s2 * &s2, CMat::identity(2, 2));
    }

    #[test]
    fn kronecker_layout() {
        let s = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(2.0), c(0.0)]);
        let x = real_diagonal(&[1.0, 3.0]);
        let k = kron_small(&s, &x);
        assert_eq!(k[(0, 2)], c(1.0));
        assert_eq!(k[(1, 3)], c(3.0));
        assert_eq!(k[(3, 1)], c(6.0));
        assert_eq!(k[(0, 0)], c(0.0));
    }

    #[test]
    fn lanczos_matches_dense() {
        let h = random_hermitian(120, 7);
        let dense = eigvalsh(&h).unwrap();
        let (vals, vecs) = block_lanczos(&h, 6, 2, 1e-10, 1).unwrap();
        for j in 0..6 {
            assert!((vals[j] - dense[j]).abs() < 1e-9, "{j}: {} vs {}", vals[j], dense[j]);
            let r = &h * vecs.column(j) - vecs.column(j) * c(vals[j]);
            assert!(r.norm() < 1e-8);
        }
    }

    #[test]
    fn lanczos_resolves_degenerate_pairs() {
        let base = random_hermitian(40, 9);
        let h = kron_identity(2, &base);
        let dense = eigvalsh(&h).unwrap();
        let (vals, _) = block_lanczos(&h, 4, 2, 1e-10, 3).unwrap();
        for j in 0..4 {
            assert!((vals[j] - dense[j]).abs() < 1e-9);
        }
    }
}

//! Time reversal `θ = (σ₂ ⊗ Id)·J` with `J` entrywise conjugation in the
//! occupation basis, and the Kramers degeneracy certificate.
//!
//! The form factors are real, so `J` commutes with `P_f`, `A(0)` and `H_f`
//! and anticommutes with `B(0)`; `σ₂` flips `σ` under conjugation, which
//! makes `θ` commute with `H(P)` while `θ² = −1`.

use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundConstants};
use crate::error::{Error, Result};
use crate::fock::{dgamma_diag, FockBasis};
use crate::hamiltonian::{sigma_dot, FiberModel, SpinorOperator};
use crate::linalg::{self, c, kron_identity, real_diagonal, symmetrize};
use crate::modes::FormFactorTable;
use crate::spectral::{ground_data_of, SpectralOptions};
use crate::{CMat, CVec, Vec3, C64};

/// `θψ = (σ₂ ⊗ Id) conj(ψ)` on `ℂ² ⊗ Fock` (spin index slow).
pub fn apply_theta(psi: &CVec) -> Result<CVec> {
    let n = psi.len();
    if !n.is_multiple_of(2) {
        return Err(Error::DimMismatch { expected: n + 1, got: n });
    }
    let d = n / 2;
    let i = C64::new(0.0, 1.0);
    Ok(CVec::from_fn(n, |r, _| if r < d { -i * psi[r + d].conj() } else { i * psi[r - d].conj() }))
}

/// `(σ₂ ⊗ Id) conj(X) (σ₂ ⊗ Id)`: `[[X₂₂, −X₂₁], [−X₁₂, X₁₁]]` of `conj(X)`.
fn theta_conjugate(x: &CMat) -> CMat {
    let d = x.nrows() / 2;
    let xc = x.map(|z| z.conj());
    let blk = |a: usize, b: usize| xc.view((a * d, b * d), (d, d)).into_owned();
    linalg::assemble_blocks(2, &[blk(1, 1), -blk(1, 0), -blk(0, 1), blk(0, 0)])
}

/// `max_ψ ‖θ²ψ + ψ‖` over the standard basis of a `dim`-dimensional
/// two-spinor space.
pub fn theta_squared_residual(dim: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..dim {
        let mut e = CVec::zeros(dim);
        e[k] = c(1.0);
        worst = worst.max((apply_theta(&apply_theta(&e)?)? + e).norm());
    }
    Ok(worst)
}

/// `‖θHθ⁻¹ − H‖_F / ‖H‖_F`.
pub fn check_theta_commutes(h: &SpinorOperator) -> f64 {
    theta_residual(h.matrix())
}

pub fn theta_residual(h: &CMat) -> f64 {
    linalg::relative_frobenius(&theta_conjugate(h), h)
}

/// Entrywise-conjugation residuals: `‖conj(X) − X‖` for `P_f`, `A(0)`, `H_f`
/// and `‖conj(B) + B‖` for `B(0)`, maximized over components and scaled by
/// `max|X|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealityResiduals {
    pub p_f: f64,
    pub a0: f64,
    pub b0_anti: f64,
    pub h_f: f64,
}

impl RealityResiduals {
    pub fn max(&self) -> f64 {
        self.p_f.max(self.a0).max(self.b0_anti).max(self.h_f)
    }
}

fn conj_residual(x: &CMat, sign: f64) -> f64 {
    let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    x.iter().map(|z| (z.conj() - z * sign).norm()).fold(0.0, f64::max) / scale
}

pub fn check_reality_relations(model: &FiberModel) -> RealityResiduals {
    let diag = |d: &[f64]| real_diagonal(d);
    let a = model.a0();
    let b = model.b0();
    RealityResiduals {
        p_f: model.p_f().iter().map(|p| conj_residual(&diag(p), 1.0)).fold(0.0, f64::max),
        a0: a.iter().map(|x| conj_residual(x.matrix(), 1.0)).fold(0.0, f64::max),
        b0_anti: b.iter().map(|x| conj_residual(x.matrix(), -1.0)).fold(0.0, f64::max),
        h_f: conj_residual(&diag(model.h_f()), 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    /// Multiplicity at least two from θ, at most two from counting.
    ExactlyTwo,
    /// θ-pairing verified, but the lower sandwich failed, so the upper
    /// bound on the multiplicity is unavailable.
    Inconclusive,
    /// γ < 1 and m_ph > 0 not both satisfied; numbers recorded, nothing asserted.
    HypothesesNotMet,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KramersCertificate {
    pub p: [f64; 3],
    pub status: CertificateStatus,
    pub ground_multiplicity: usize,
    pub theta_residual: f64,
    /// `‖Hθv − Eθv‖ / ‖H‖` for the first ground vector `v`.
    pub pairing_residual: f64,
    /// `|⟨v, θv⟩|`.
    pub overlap: f64,
    /// Distance of `θv` from the computed ground eigenspace.
    pub span_residual: f64,
    pub count_below_sigma: Option<usize>,
}

impl KramersCertificate {
    pub fn passed(&self) -> bool {
        matches!(self.status, CertificateStatus::ExactlyTwo | CertificateStatus::HypothesesNotMet)
    }
}

/// Kramers pairing of the ground level at `P`, combined with the min-max
/// count below `Σ₋(P)` into an exact-multiplicity statement.
pub fn kramers_certificate(model: &FiberModel, p: &Vec3, opts: &SpectralOptions) -> Result<KramersCertificate> {
    const PAIR_TOL: f64 = 1e-8;
    let h = model.h(p)?;
    let theta_res = check_theta_commutes(&h);
    let gd = ground_data_of(h.matrix(), opts)?;
    let norm = linalg::hermitian_norm(h.matrix())?;
    let v = gd.ground_vectors.column(0).into_owned();
    let tv = apply_theta(&v)?;
    let pairing = (h.matrix() * &tv - &tv * c(gd.e)).norm() / norm.max(1.0);
    let overlap = v.dotc(&tv).norm();
    let q = &gd.ground_vectors;
    let span = (&tv - q * (q.adjoint() * &tv)).norm();

    let paired = gd.multiplicity >= 2 && theta_res <= 1e-12 && pairing <= PAIR_TOL && overlap <= PAIR_TOL && span <= PAIR_TOL;
    let mut cert = KramersCertificate {
        p: [p[0], p[1], p[2]],
        status: CertificateStatus::Failed,
        ground_multiplicity: gd.multiplicity,
        theta_residual: theta_res,
        pairing_residual: pairing,
        overlap,
        span_residual: span,
        count_below_sigma: None,
    };
    if !model.params().gap_hypotheses_met() {
        cert.status = CertificateStatus::HypothesesNotMet;
        return Ok(cert);
    }
    if !paired {
        return Ok(cert);
    }
    let consts = BoundConstants::from_model(model);
    let pa = p.norm();
    let sigma = consts.sigma_minus(pa);
    let hu = model.h(&Vec3::new(pa, 0.0, 0.0))?;
    let sandwich = bounds::check_op_leq(&bounds::build_l_minus(model, pa, &consts)?, hu.matrix(), 1e-9)?;
    let count = bounds::count_below_with(h.matrix(), sigma, opts)?;
    cert.count_below_sigma = Some(count);
    cert.status = if !sandwich.holds {
        CertificateStatus::Inconclusive
    } else if count <= 2 && gd.multiplicity == 2 {
        CertificateStatus::ExactlyTwo
    } else {
        CertificateStatus::Failed
    };
    Ok(cert)
}

/// Kinetic form of a position-space toy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kinetic {
    /// `(σ·Π)²/2M`.
    NonRelativistic,
    /// `γ√((σ·Π)² + M²)`.
    SemiRelativistic,
}

/// Charge on a symmetric one-dimensional grid `x_i = (i − (n−1)/2)h` along
/// the first axis, coupled to the quantized field at `x`, in an external
/// potential. Ordering: spin ⊗ site ⊗ Fock.
#[derive(Debug, Clone)]
pub struct PositionToy {
    pub sites: usize,
    pub spacing: f64,
    pub potential: Vec<f64>,
    pub n_max: usize,
    pub mass: f64,
    pub gamma: f64,
    pub kinetic: Kinetic,
}

impl PositionToy {
    pub fn positions(&self) -> Vec<f64> {
        let mid = (self.sites as f64 - 1.0) / 2.0;
        (0..self.sites).map(|i| (i as f64 - mid) * self.spacing).collect()
    }

    /// `‖V − RV‖/‖V‖` with `R` the reflection `x → −x`.
    pub fn potential_oddness(&self) -> f64 {
        let n = self.potential.len();
        let num: f64 = (0..n).map(|i| (self.potential[i] - self.potential[n - 1 - i]).powi(2)).sum();
        let den: f64 = self.potential.iter().map(|v| v * v).sum();
        if den == 0.0 { 0.0 } else { (num / den).sqrt() }
    }

    pub fn hamiltonian(&self, table: &FormFactorTable) -> Result<CMat> {
        let n = self.sites;
        if n == 0 || self.potential.len() != n {
            return Err(Error::DimMismatch { expected: n, got: self.potential.len() });
        }
        let basis = FockBasis::enumerate(table.len(), self.n_max)?;
        let d = basis.dim();
        let xs = self.positions();

        // periodic central difference for p₁ = −i d/dx
        let mut p1 = CMat::zeros(n, n);
        if n > 2 {
            let amp = C64::new(0.0, -0.5 / self.spacing);
            for i in 0..n {
                p1[(i, (i + 1) % n)] += amp;
                p1[(i, (i + n - 1) % n)] -= amp;
            }
        }
        let big = n * d;
        let mut pi: [CMat; 3] = std::array::from_fn(|_| CMat::zeros(big, big));
        pi[0] = linalg::kron_small(&p1, &CMat::identity(d, d));
        for (site, &x) in xs.iter().enumerate() {
            for j in 0..3 {
                // A(x) = Σ f (a e^{ik·x} + a† e^{−ik·x})
                let a: Vec<C64> = table
                    .entries
                    .iter()
                    .map(|f| C64::from_polar(f.f[j], -f.k[0] * x))
                    .collect();
                let off = site * d;
                let fa = crate::fock::field_sum(&basis, &a).into_matrix();
                let mut blk = pi[j].view_mut((off, off), (d, d));
                blk += fa;
            }
        }
        let s = sigma_dot([&pi[0], &pi[1], &pi[2]]);
        let sq = symmetrize(&(&s * &s));
        let kin = match self.kinetic {
            Kinetic::NonRelativistic => sq * c(0.5 / self.mass),
            Kinetic::SemiRelativistic => {
                let mut x = sq;
                for i in 0..x.nrows() {
                    x[(i, i)] += c(self.mass * self.mass);
                }
                linalg::sqrt_psd(&x)? * c(self.gamma)
            }
        };
        let hf = dgamma_diag(&basis, &table.omegas());
        let mut local = Vec::with_capacity(big);
        for v in &self.potential {
            local.extend(hf.iter().map(|h| h + v));
        }
        Ok(kin + kron_identity(2, &real_diagonal(&local)))
    }

    /// `‖ΘHΘ⁻¹ − H‖_F/‖H‖_F` with `Θ = (σ₂ ⊗ R ⊗ Id)·J`.
    pub fn theta_residual(&self, h: &CMat) -> f64 {
        let n = self.sites;
        let d = h.nrows() / (2 * n);
        let mut r = CMat::zeros(n, n);
        for i in 0..n {
            r[(i, n - 1 - i)] = c(1.0);
        }
        let refl = kron_identity(2, &linalg::kron_small(&r, &CMat::identity(d, d)));
        let reflected = &refl * h * &refl;
        linalg::relative_frobenius(&theta_conjugate(&reflected), h)
    }
}

/// Models beyond `H(P)` that share the time-reversal structure.
#[derive(Debug, Clone)]
pub enum RelatedModel {
    /// `H_NR(P) = T(P)/2M + H_f`.
    NonRelativistic { p: Vec3 },
    Position(PositionToy),
}

/// θ-commutation residual of a related model. Position toys use the
/// reflected conjugation and reject potentials that are not even.
pub fn check_theta_commutes_related(model: &FiberModel, which: &RelatedModel) -> Result<f64> {
    match which {
        RelatedModel::NonRelativistic { p } => Ok(check_theta_commutes(&model.h_nr(p))),
        RelatedModel::Position(toy) => {
            let h = toy.hamiltonian(model.table())?;
            let residual = toy.theta_residual(&h);
            if toy.potential_oddness() > 1e-12 {
                return Err(Error::OddPotential { residual });
            }
            Ok(residual)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> CVec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CVec::from_fn(n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn theta_is_antiunitary_involution_up_to_sign() {
        let psi = random_vec(14, 3);
        let t = apply_theta(&psi).unwrap();
        assert!((apply_theta(&t).unwrap() + &psi).norm() < 1e-15);
        assert!((t.norm() - psi.norm()).abs() < 1e-14);
        assert!(psi.dotc(&t).norm() < 1e-14);
        assert_eq!(theta_squared_residual(10).unwrap(), 0.0);
        assert!(apply_theta(&random_vec(3, 1)).is_err());
    }

    #[test]
    fn reality_relations() {
        let m = FiberModel::new(&ModelParams::small().with_coupling(0.2)).unwrap();
        let r = check_reality_relations(&m);
        assert_eq!(r.h_f, 0.0);
        assert!(r.a0 <= 1e-14 && r.b0_anti <= 1e-14 && r.p_f == 0.0);
    }

    #[test]
    fn hamiltonian_commutes_and_control_breaks() {
        let m = FiberModel::new(&ModelParams::small().with_coupling(0.1)).unwrap();
        let free = FiberModel::new(&ModelParams::small().with_coupling(0.0)).unwrap();
        let p = Vec3::new(0.4, -0.3, 0.2);
        assert_eq!(check_theta_commutes(&free.h(&p).unwrap()), 0.0);
        let h = m.h(&p).unwrap();
        assert!(check_theta_commutes(&h) <= 1e-12);
        let s3 = real_diagonal(&[1.0, -1.0]);
        let broken = h.matrix() + linalg::kron_small(&s3, &CMat::identity(m.dim(), m.dim()));
        assert!(theta_residual(&broken) > 0.1);
    }

    #[test]
    fn certificate_free_and_coupled() {
        let opts = SpectralOptions::default();
        let free = FiberModel::new(&ModelParams::small().with_coupling(0.0)).unwrap();
        let c0 = kramers_certificate(&free, &Vec3::zeros(), &opts).unwrap();
        assert_eq!(c0.status, CertificateStatus::ExactlyTwo);
        for e in [0.05, 0.1] {
            let m = FiberModel::new(&ModelParams::small().with_coupling(e)).unwrap();
            let cert = kramers_certificate(&m, &Vec3::new(0.7, 0.0, 0.0), &opts).unwrap();
            assert_eq!(cert.status, CertificateStatus::ExactlyTwo, "{cert:?}");
            assert_eq!(cert.count_below_sigma, Some(2));
        }
        let g1 = FiberModel::new(&ModelParams { gamma: 1.0, ..ModelParams::small() }).unwrap();
        let cert = kramers_certificate(&g1, &Vec3::zeros(), &opts).unwrap();
        assert_eq!(cert.status, CertificateStatus::HypothesesNotMet);
        assert!(cert.passed());
    }

    #[test]
    fn free_ground_vectors_are_spin_flipped_vacua() {
        let free = FiberModel::new(&ModelParams::small().with_coupling(0.0)).unwrap();
        let up = {
            let mut v = CVec::zeros(2 * free.dim());
            v[0] = c(1.0);
            v
        };
        let t = apply_theta(&up).unwrap();
        assert!((t[free.dim()].norm() - 1.0).abs() < 1e-15);
        let h = free.h(&Vec3::zeros()).unwrap();
        assert!((h.matrix() * &t - &t * c(0.5)).norm() < 1e-12);
    }

    fn toy(potential: Vec<f64>, kinetic: Kinetic) -> PositionToy {
        PositionToy { sites: potential.len(), spacing: 0.7, potential, n_max: 1, mass: 1.0, gamma: 0.5, kinetic }
    }

    #[test]
    fn related_models() {
        let m = FiberModel::new(&ModelParams::default().with_coupling(0.2)).unwrap();
        let nr = RelatedModel::NonRelativistic { p: Vec3::new(0.3, 0.1, -0.5) };
        assert!(check_theta_commutes_related(&m, &nr).unwrap() <= 1e-12);
        for kin in [Kinetic::NonRelativistic, Kinetic::SemiRelativistic] {
            let even = RelatedModel::Position(toy(vec![0.3, -0.1, 0.3], kin));
            assert!(check_theta_commutes_related(&m, &even).unwrap() <= 1e-12);
            let odd = RelatedModel::Position(toy(vec![0.3, 0.0, -0.3], kin));
            match check_theta_commutes_related(&m, &odd) {
                Err(Error::OddPotential { residual }) => assert!(residual > 1e-3),
                other => panic!("{other:?}"),
            }
        }
        let two_site = RelatedModel::Position(toy(vec![0.2, 0.2], Kinetic::NonRelativistic));
        assert!(check_theta_commutes_related(&m, &two_site).unwrap() <= 1e-12);
    }
}

//! Fiber operators on ℂ² ⊗ (truncated Fock space).
//!
//! `v(P) = P − P_f + A(0)`, `T(P) = (σ·v)²`, `D(P) = α·v + Mβ` and
//! `H(P) = γ√(T(P) + M²) + H_f`.
//!
//! Everything quadratic in `v` is the compression `Π X Π` of the untruncated
//! operator onto the first `N_max` sectors, not the product of compressed
//! factors. Because `v` raises the photon number by at most one, `Π v_i v_j Π
//! = (Π v_i Π')(Π' v_j Π)` with `Π'` the projection on `N_max + 1` sectors,
//! so the model keeps the rows `Π v_j Π'` built on the enlarged basis. With
//! this the Pauli identity `(σ·v)² = v² + σ·B` and `D² = T + M²` hold to
//! rounding, and operator inequalities of the untruncated theory survive.

use crate::error::{Error, Result};
use crate::fock::{dgamma_diag, field_sum, field_sum_rows, FockBasis, OperatorMatrix};
use crate::linalg::{self, c, kron_identity, real_diagonal, sqrt_psd, symmetrize};
use crate::modes::{build_mode_set, coupling_norms, form_factors, CouplingNorms, FormFactorTable, ModeSet};
use crate::params::ModelParams;
use crate::{CMat, Vec3, C64};

/// Operator on `ℂ^s ⊗ Fock` with the spin index slow: entry
/// `(a·dim + i, b·dim + j)` is block `(a, b)` at Fock position `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorOperator {
    spin_dim: usize,
    fock_dim: usize,
    op: OperatorMatrix,
}

impl SpinorOperator {
    pub fn new(spin_dim: usize, fock_dim: usize, matrix: CMat) -> Result<Self> {
        if matrix.nrows() != spin_dim * fock_dim {
            return Err(Error::DimMismatch { expected: spin_dim * fock_dim, got: matrix.nrows() });
        }
        Ok(SpinorOperator { spin_dim, fock_dim, op: OperatorMatrix::hermitian(matrix)? })
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dim
    }

    pub fn dim(&self) -> usize {
        self.spin_dim * self.fock_dim
    }

    pub fn matrix(&self) -> &CMat {
        self.op.matrix()
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn into_matrix(self) -> CMat {
        self.op.into_matrix()
    }

    pub fn block(&self, a: usize, b: usize) -> CMat {
        let d = self.fock_dim;
        self.matrix().view((a * d, b * d), (d, d)).into_owned()
    }
}

/// How `T(P)` is assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TForm {
    /// `(σ·v)(σ·v)†` from the Pauli blocks of `σ·v`.
    Direct,
    /// `(Σⱼ vⱼ²) ⊗ Id₂ + σ·B(0)`.
    Expanded,
}

/// `σ·x = [[x₃, x₁ − i x₂], [x₁ + i x₂, −x₃]]` for blocks of any shape.
pub fn sigma_dot(x: [&CMat; 3]) -> CMat {
    let i = C64::new(0.0, 1.0);
    let lo = x[0] - x[1] * i;
    let hi = x[0] + x[1] * i;
    linalg::assemble_blocks(2, &[x[2].clone(), lo, hi, -x[2]])
}

/// `A(0)ⱼ = Σ_m f_{m,j}(a_m + a_m†)`.
pub fn build_a0(basis: &FockBasis, table: &FormFactorTable) -> [OperatorMatrix; 3] {
    std::array::from_fn(|j| field_sum(basis, &a_coefficients(table, j)))
}

/// `B(0)ⱼ = Σ_m i(k_m∧f_m)ⱼ (a_m − a_m†)`: Hermitian, purely imaginary.
pub fn build_b0(basis: &FockBasis, table: &FormFactorTable) -> [OperatorMatrix; 3] {
    std::array::from_fn(|j| field_sum(basis, &b_coefficients(table, j)))
}

fn a_coefficients(table: &FormFactorTable, j: usize) -> Vec<C64> {
    table.entries.iter().map(|f| c(f.f[j])).collect()
}

fn b_coefficients(table: &FormFactorTable, j: usize) -> Vec<C64> {
    // c̄ a + c a† with c = −i(k∧f)ⱼ
    table.entries.iter().map(|f| C64::new(0.0, -f.k.cross(&f.f)[j])).collect()
}

/// Truncated fiber model at fixed parameters. Holds the mode data and the
/// `P`-independent pieces; every `P`-dependent operator is assembled from
/// these in `O(dim²)` plus one eigendecomposition for square roots.
#[derive(Debug, Clone)]
pub struct FiberModel {
    params: ModelParams,
    modes: ModeSet,
    table: FormFactorTable,
    norms: CouplingNorms,
    basis: FockBasis,
    ext_dim: usize,
    hf: Vec<f64>,
    pf: [Vec<f64>; 3],
    /// `Π(−P_f + A(0))ⱼΠ'`, `dim × ext_dim`.
    rows: [CMat; 3],
    /// `Π(−P_f + A(0))ⱼΠ`.
    shift: [CMat; 3],
    /// `Π (−P_f + A)ᵢ (−P_f + A)ⱼ Π`.
    gram0: [[CMat; 3]; 3],
    a: [CMat; 3],
    b: [CMat; 3],
}

impl FiberModel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let modes = build_mode_set(params)?;
        let table = form_factors(&modes, params);
        let norms = coupling_norms(&table);
        let basis = FockBasis::enumerate(modes.len(), params.n_max)?;
        let ext = FockBasis::enumerate(modes.len(), params.n_max + 1)?;
        let dim = basis.dim();

        let omega = table.omegas();
        let hf = dgamma_diag(&basis, &omega);
        let pf_ext: [Vec<f64>; 3] = std::array::from_fn(|j| {
            let kj: Vec<f64> = table.entries.iter().map(|f| f.k[j]).collect();
            dgamma_diag(&ext, &kj)
        });
        let rows: [CMat; 3] = std::array::from_fn(|j| {
            let mut r = field_sum_rows(&ext, &a_coefficients(&table, j), dim);
            for i in 0..dim {
                r[(i, i)] -= c(pf_ext[j][i]);
            }
            r
        });
        let shift = std::array::from_fn(|j| rows[j].columns(0, dim).into_owned());
        let gram0 = std::array::from_fn(|i| std::array::from_fn(|j| &rows[i] * rows[j].adjoint()));
        let pf = std::array::from_fn(|j| pf_ext[j][..dim].to_vec());
        let a = std::array::from_fn(|j| field_sum_rows(&basis, &a_coefficients(&table, j), dim));
        let b = std::array::from_fn(|j| field_sum_rows(&basis, &b_coefficients(&table, j), dim));
        Ok(FiberModel {
            params: params.clone(),
            modes,
            table,
            norms,
            ext_dim: ext.dim(),
            basis,
            hf,
            pf,
            rows,
            shift,
            gram0,
            a,
            b,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn table(&self) -> &FormFactorTable {
        &self.table
    }

    pub fn norms(&self) -> &CouplingNorms {
        &self.norms
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// Fock dimension.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Dimension of the enlarged basis used for exact compressions.
    pub fn ext_dim(&self) -> usize {
        self.ext_dim
    }

    /// Diagonal of `H_f`.
    pub fn h_f(&self) -> &[f64] {
        &self.hf
    }

    /// Diagonals of `P_f,ⱼ`.
    pub fn p_f(&self) -> &[Vec<f64>; 3] {
        &self.pf
    }

    /// Compressed `(−P_f + A(0))ⱼ`.
    pub fn field_shift(&self, j: usize) -> &CMat {
        &self.shift[j]
    }

    pub fn a0(&self) -> [OperatorMatrix; 3] {
        std::array::from_fn(|j| OperatorMatrix::hermitian(self.a[j].clone()).expect("real symmetric"))
    }

    pub fn b0(&self) -> [OperatorMatrix; 3] {
        std::array::from_fn(|j| OperatorMatrix::hermitian(self.b[j].clone()).expect("Hermitian"))
    }

    /// Compressed `vⱼ(P) = Pⱼ − P_f,ⱼ + A(0)ⱼ`.
    pub fn v(&self, p: &Vec3) -> [OperatorMatrix; 3] {
        std::array::from_fn(|j| {
            OperatorMatrix::hermitian(self.v_block(p, j)).expect("Hermitian")
        })
    }

    fn v_block(&self, p: &Vec3, j: usize) -> CMat {
        let mut m = self.shift[j].clone();
        for i in 0..self.dim() {
            m[(i, i)] += c(p[j]);
        }
        m
    }

    /// `Π vᵢ(P) vⱼ(P) Π`.
    pub fn gram(&self, p: &Vec3, i: usize, j: usize) -> CMat {
        let mut g = &self.gram0[i][j] + &self.shift[j] * c(p[i]) + &self.shift[i] * c(p[j]);
        for d in 0..self.dim() {
            g[(d, d)] += c(p[i] * p[j]);
        }
        g
    }

    /// `Π (Σⱼ vⱼ(P)²) Π`.
    pub fn v_squared(&self, p: &Vec3) -> CMat {
        symmetrize(&(self.gram(p, 0, 0) + self.gram(p, 1, 1) + self.gram(p, 2, 2)))
    }

    /// Rows `Π vⱼ(P) Π'` on the enlarged basis.
    fn v_rows(&self, p: &Vec3, j: usize) -> CMat {
        let mut r = self.rows[j].clone();
        for i in 0..self.dim() {
            r[(i, i)] += c(p[j]);
        }
        r
    }

    pub fn t(&self, p: &Vec3, form: TForm) -> SpinorOperator {
        let m = match form {
            TForm::Direct => {
                let r: [CMat; 3] = std::array::from_fn(|j| self.v_rows(p, j));
                let s = sigma_dot([&r[0], &r[1], &r[2]]);
                symmetrize(&(&s * s.adjoint()))
            }
            TForm::Expanded => {
                kron_identity(2, &self.v_squared(p)) + sigma_dot([&self.b[0], &self.b[1], &self.b[2]])
            }
        };
        SpinorOperator::new(2, self.dim(), m).expect("T is Hermitian")
    }

    /// `β = diag(Id₂, −Id₂) ⊗ Id`.
    pub fn beta(&self) -> CMat {
        let d = self.dim();
        let mut b = CMat::identity(4 * d, 4 * d);
        for i in 2 * d..4 * d {
            b[(i, i)] = c(-1.0);
        }
        b
    }

    /// Compressed `D(P) = α·v(P) + Mβ` in the standard representation.
    pub fn dirac(&self, p: &Vec3) -> SpinorOperator {
        let v: [CMat; 3] = std::array::from_fn(|j| self.v_block(p, j));
        let sv = sigma_dot([&v[0], &v[1], &v[2]]);
        let m = self.params.mass;
        let id = CMat::identity(2 * self.dim(), 2 * self.dim());
        let full = linalg::assemble_blocks(2, &[&id * c(m), sv.clone(), sv, &id * c(-m)]);
        SpinorOperator::new(4, self.dim(), full).expect("D is Hermitian")
    }

    /// `Π D(P)² Π`, the compression of the square (not the square of the
    /// compression, which differs on the top sector).
    pub fn dirac_squared(&self, p: &Vec3) -> SpinorOperator {
        let r: [CMat; 3] = std::array::from_fn(|j| self.v_rows(p, j));
        let sr = sigma_dot([&r[0], &r[1], &r[2]]);
        let (d, x) = (self.dim(), self.ext_dim);
        let m = self.params.mass;
        let mut e = CMat::zeros(2 * d, 2 * x);
        for i in 0..d {
            e[(i, i)] = c(m);
            e[(d + i, x + i)] = c(m);
        }
        let rows = linalg::assemble_blocks(2, &[e.clone(), sr.clone(), sr, -e]);
        SpinorOperator::new(4, d, symmetrize(&(&rows * rows.adjoint()))).expect("D² is Hermitian")
    }

    /// `T(P) + M²`.
    pub fn t_plus_mass(&self, p: &Vec3) -> CMat {
        let mut t = self.t(p, TForm::Direct).into_matrix();
        let m2 = self.params.mass * self.params.mass;
        for i in 0..t.nrows() {
            t[(i, i)] += c(m2);
        }
        t
    }

    /// `|D(P)| = √(T(P) + M²)` on the two-spinor space.
    pub fn abs_dirac(&self, p: &Vec3) -> Result<CMat> {
        sqrt_psd(&self.t_plus_mass(p))
    }

    /// `H(P) = γ|D(P)| + H_f`.
    pub fn h(&self, p: &Vec3) -> Result<SpinorOperator> {
        let mut m = self.abs_dirac(p)? * c(self.params.gamma);
        self.add_hf(&mut m, 2);
        SpinorOperator::new(2, self.dim(), m)
    }

    fn add_hf(&self, m: &mut CMat, spin: usize) {
        let d = self.dim();
        for s in 0..spin {
            for i in 0..d {
                m[(s * d + i, s * d + i)] += c(self.hf[i]);
            }
        }
    }

    /// Spinless `H_SL(P) = γ√(v(P)² + M²) + H_f`.
    pub fn h_spinless(&self, p: &Vec3) -> Result<OperatorMatrix> {
        let mut x = self.v_squared(p);
        let m2 = self.params.mass * self.params.mass;
        for i in 0..x.nrows() {
            x[(i, i)] += c(m2);
        }
        let mut m = sqrt_psd(&x)? * c(self.params.gamma);
        self.add_hf(&mut m, 1);
        OperatorMatrix::hermitian(m)
    }

    /// Diagonal of the free `γ√((P − P_f)² + M²) + H_f` on one spin copy.
    pub fn h0_diag(&self, p: &Vec3) -> Vec<f64> {
        let g = self.params.gamma;
        let m2 = self.params.mass * self.params.mass;
        (0..self.dim())
            .map(|i| {
                let q2: f64 = (0..3).map(|j| (p[j] - self.pf[j][i]).powi(2)).sum();
                g * (q2 + m2).sqrt() + self.hf[i]
            })
            .collect()
    }

    /// Free fiber Hamiltonian `H₀(P)`, diagonal, spin-doubled.
    pub fn h0(&self, p: &Vec3) -> SpinorOperator {
        let d = self.h0_diag(p);
        SpinorOperator::new(2, self.dim(), kron_identity(2, &real_diagonal(&d))).expect("diagonal")
    }

    /// Non-relativistic fiber Hamiltonian `T(P)/2M + H_f`.
    pub fn h_nr(&self, p: &Vec3) -> SpinorOperator {
        let mut m = self.t(p, TForm::Expanded).into_matrix() * c(0.5 / self.params.mass);
        self.add_hf(&mut m, 2);
        SpinorOperator::new(2, self.dim(), m).expect("Hermitian")
    }

    /// `‖(|D(P)| − |D₀(P)|)(H₀(P) + 1)⁻¹‖`.
    pub fn interaction_norm(&self, p: &Vec3) -> Result<f64> {
        let m2 = self.params.mass * self.params.mass;
        let abs_free: Vec<f64> = (0..self.dim())
            .map(|i| ((0..3).map(|j| (p[j] - self.pf[j][i]).powi(2)).sum::<f64>() + m2).sqrt())
            .collect();
        let mut diff = self.abs_dirac(p)?;
        let d = self.dim();
        for s in 0..2 {
            for i in 0..d {
                diff[(s * d + i, s * d + i)] -= c(abs_free[i]);
            }
        }
        let h0 = self.h0_diag(p);
        for col in 0..2 * d {
            let scale = 1.0 / (h0[col % d] + 1.0);
            diff.column_mut(col).iter_mut().for_each(|z| *z *= scale);
        }
        Ok(linalg::spectral_norm(&diff))
    }

    /// `‖(|D(P−k)| − |D(P)|)(H(P) + 1)⁻¹‖ / |k|`.
    pub fn lipschitz_ratio(&self, p: &Vec3, k: &Vec3) -> Result<f64> {
        let kn = k.norm();
        if kn == 0.0 {
            return Err(Error::InvalidParams("Lipschitz ratio needs k != 0".into()));
        }
        let diff = self.abs_dirac(&(p - k))? - self.abs_dirac(p)?;
        let resolvent = linalg::hermitian_function(self.h(p)?.matrix(), |x| 1.0 / (x + 1.0))?;
        Ok(linalg::spectral_norm(&(diff * resolvent)) / kn)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, relative_frobenius, sqrt_pd_quad};
    use crate::modes::FormFactor;

    fn small(e: f64) -> FiberModel {
        FiberModel::new(&ModelParams::small().with_coupling(e)).unwrap()
    }

    fn p(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3::new(x, y, z)
    }

    #[test]
    fn free_theory_is_diagonal_closed_form() {
        let m = small(0.0);
        let pv = p(0.4, -0.1, 0.3);
        for j in 0..3 {
            assert!(m.a0()[j].matrix().iter().all(|z| z.norm() == 0.0));
            assert!(m.b0()[j].matrix().iter().all(|z| z.norm() == 0.0));
        }
        let t = m.t(&pv, TForm::Direct);
        let d = m.dim();
        for i in 0..d {
            let occ = m.basis().state(i);
            let mut q = pv;
            for (n, md) in occ.iter().zip(&m.modes().modes) {
                q -= md.k * *n as f64;
            }
            for s in 0..2 {
                assert!((t.matrix()[(s * d + i, s * d + i)].re - q.norm_squared()).abs() < 1e-14);
            }
        }
        let h = m.h(&pv).unwrap();
        assert!(relative_frobenius(h.matrix(), m.h0(&pv).matrix()) < 1e-14);
        let lo = eigvalsh(m.h(&Vec3::zeros()).unwrap().matrix()).unwrap()[0];
        assert!((lo - 0.5).abs() < 1e-12);
    }

    #[test]
    fn vacuum_expectation_of_v_is_p() {
        let m = small(0.2);
        let pv = p(0.3, -0.7, 1.1);
        let v = m.v(&pv);
        for j in 0..3 {
            assert!((v[j].matrix()[(0, 0)] - c(pv[j])).norm() < 1e-15);
        }
    }

    #[test]
    fn single_mode_magnetic_field() {
        let basis = FockBasis::enumerate(1, 1).unwrap();
        let (kappa, g) = (0.7, 0.3);
        let table = FormFactorTable {
            entries: vec![FormFactor { k: p(0.0, 0.0, kappa), f: p(g, 0.0, 0.0), g, omega: 1.0 }],
        };
        let b = build_b0(&basis, &table);
        assert!((b[1].matrix()[(0, 1)] - C64::new(0.0, kappa * g)).norm() < 1e-15);
        assert!((b[1].matrix()[(1, 0)] - C64::new(0.0, -kappa * g)).norm() < 1e-15);
        assert!(b[0].matrix().iter().all(|z| z.norm() == 0.0));
        let a = build_a0(&basis, &table);
        assert_eq!(a[0].matrix()[(0, 1)], c(g));
    }

    #[test]
    fn field_reality() {
        let m = small(0.3);
        for j in 0..3 {
            assert!(m.a0()[j].matrix().iter().all(|z| z.im == 0.0));
            assert!(m.b0()[j].matrix().iter().all(|z| z.re == 0.0));
        }
    }

    #[test]
    fn commutator_matches_curl() {
        let m = small(0.3);
        let pv = p(0.2, 0.5, -0.4);
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let lhs = (m.gram(&pv, i, j) - m.gram(&pv, j, i)) * C64::new(0.0, 1.0);
            // i[vᵢ, vⱼ] = field_sum(i(kⱼ fᵢ − kᵢ fⱼ))
            let coeffs: Vec<C64> = m
                .table()
                .entries
                .iter()
                .map(|f| C64::new(0.0, f.k[j] * f.f[i] - f.k[i] * f.f[j]))
                .collect();
            let rhs = field_sum(m.basis(), &coeffs).into_matrix();
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn pauli_identity() {
        for e in [0.05, 0.3] {
            let m = small(e);
            let pv = p(0.9, -0.2, 0.4);
            let direct = m.t(&pv, TForm::Direct);
            let expanded = m.t(&pv, TForm::Expanded);
            assert!(relative_frobenius(direct.matrix(), expanded.matrix()) < 1e-12);
            assert!(eigvalsh(direct.matrix()).unwrap()[0] >= -1e-10 * direct.matrix().norm());
        }
    }

    #[test]
    fn dirac_square_and_clifford() {
        let m = small(0.25);
        let pv = p(0.1, 0.6, -0.3);
        let d2 = m.dirac_squared(&pv);
        let tm = m.t_plus_mass(&pv);
        let mut expect = CMat::zeros(4 * m.dim(), 4 * m.dim());
        expect.view_mut((0, 0), (2 * m.dim(), 2 * m.dim())).copy_from(&tm);
        expect.view_mut((2 * m.dim(), 2 * m.dim()), (2 * m.dim(), 2 * m.dim())).copy_from(&tm);
        assert!((d2.matrix() - &expect).norm() <= 1e-10 * d2.matrix().norm());

        let beta = m.beta();
        let massless = m.dirac(&pv).matrix() - &beta * c(m.params().mass);
        let anti = &massless * &beta + &beta * &massless;
        assert!(anti.norm() < 1e-13);
    }

    #[test]
    fn free_dirac_at_rest() {
        let m = small(0.0);
        let d = m.dirac(&Vec3::zeros());
        // vacuum rows of the four spinor components
        let idx: Vec<usize> = (0..4).map(|s| s * m.dim()).collect();
        let block = CMat::from_fn(4, 4, |r, col| d.matrix()[(idx[r], idx[col])]);
        let ev = eigvalsh(&block).unwrap();
        assert!(ev.iter().zip([-1.0, -1.0, 1.0, 1.0]).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn quadrature_root_agrees() {
        let m = small(0.2);
        let x = m.t_plus_mass(&p(0.5, 0.0, 0.0));
        let q = sqrt_pd_quad(&x, 1e-10).unwrap();
        let e = sqrt_psd(&x).unwrap();
        assert!((q - e).iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-10);
    }

    #[test]
    fn vector_potential_form_bound() {
        let m = FiberModel::new(&ModelParams::default().with_coupling(0.3)).unwrap();
        for j in 0..3 {
            let n = m.norms().n_half_component[j];
            let a = m.a0()[j].matrix().clone();
            let hf1: Vec<f64> = m.h_f().iter().map(|h| n * (h + 1.0)).collect();
            let bound = real_diagonal(&hf1);
            assert!(eigvalsh(&(&bound - &a)).unwrap()[0] >= -1e-10);
            assert!(eigvalsh(&(&bound + &a)).unwrap()[0] >= -1e-10);
        }
    }

    #[test]
    fn free_hamiltonian_entries() {
        let m = small(0.1);
        let pv = p(0.7, 0.0, 0.0);
        let h0 = m.h0_diag(&pv);
        assert!((h0[0] - 0.5 * (0.49f64 + 1.0).sqrt()).abs() < 1e-15);
        for (i, md) in m.modes().modes.iter().enumerate() {
            let mut occ = vec![0u16; m.modes().len()];
            occ[i] = 1;
            let idx = m.basis().index_of(&occ).unwrap();
            let om = crate::modes::dispersion(&md.k, 0.5);
            let expect = 0.5 * ((pv - md.k).norm_squared() + 1.0).sqrt() + om;
            assert!((h0[idx] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn spinless_matches_free_form_at_zero_coupling() {
        let m = small(0.0);
        let pv = p(0.3, 0.2, 0.0);
        let sl = m.h_spinless(&pv).unwrap();
        let h0 = real_diagonal(&m.h0_diag(&pv));
        assert!((sl.matrix() - h0).norm() < 1e-13);
    }

    #[test]
    fn interaction_norm_trend() {
        let pv = p(0.5, 0.0, 0.0);
        assert_eq!(small(0.0).interaction_norm(&pv).unwrap(), 0.0);
        let a = small(0.02).interaction_norm(&pv).unwrap();
        let b = small(0.04).interaction_norm(&pv).unwrap();
        assert!(a > 0.0 && (b / a - 2.0).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn lipschitz_ratio_finite() {
        let m = small(0.2);
        let pv = p(0.4, 0.0, 0.0);
        for s in [1e-3, 1e-2, 1e-1, 1.0] {
            let r = m.lipschitz_ratio(&pv, &p(s, 0.0, 0.0)).unwrap();
            assert!(r.is_finite() && r < 2.0, "{s}: {r}");
        }
    }
}

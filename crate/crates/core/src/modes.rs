//! Discretization of the photon field inside the ultraviolet ball.
//!
//! Modes are products of Gauss–Legendre radial shells on `[δ, Λ]` and an
//! antipodally closed direction set, times the two polarizations. The
//! quadrature weight `w = w_r · r² · 4π/n_dir` is absorbed into the form
//! factor as `√w`, so the discrete ladder operators obey unit commutators.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::params::{DirectionSet, ModelParams};
use crate::Vec3;

/// `ω(k) = √(|k|² + m_ph²)`.
pub fn dispersion(k: &Vec3, photon_mass: f64) -> f64 {
    (k.norm_squared() + photon_mass * photon_mass).sqrt()
}

/// Polarization pair completing `k/|k|` to a right-handed orthonormal frame.
///
/// `ε₁ = normalize(a × k)` with `a = ẑ`, or `a = x̂` when `k` is within
/// `1e-9` (relative) of the z axis; `ε₂ = normalize(k × ε₁)`.
pub fn dreibein(k: &Vec3) -> Result<(Vec3, Vec3)> {
    let kn = k.norm();
    if !(kn > 0.0) {
        return Err(Error::ZeroWavevector);
    }
    let z = Vec3::z();
    let a = if z.cross(k).norm() < 1e-9 * kn { Vec3::x() } else { z };
    let e1 = a.cross(k).normalize();
    let e2 = k.cross(&e1).normalize();
    Ok((e1, e2))
}

/// One discrete photon mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub k: Vec3,
    /// Polarization index, 1 or 2.
    pub polarization: u8,
    pub eps: Vec3,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    pub modes: Vec<Mode>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.modes.iter().map(|m| m.weight).sum()
    }

    /// For every mode `m`, the mode `m'` with `k' = −k` and the same
    /// polarization index, plus the sign `s` with `ε' = s·ε`.
    pub fn parity_partners(&self) -> Option<Vec<(usize, f64)>> {
        self.modes
            .iter()
            .map(|m| {
                self.modes.iter().enumerate().find_map(|(j, o)| {
                    if o.polarization == m.polarization
                        && (o.k + m.k).norm() <= 1e-12 * (1.0 + m.k.norm())
                        && (o.weight - m.weight).abs() <= 1e-14 * m.weight
                    {
                        let s = o.eps.dot(&m.eps);
                        ((s.abs() - 1.0).abs() < 1e-12).then_some((j, s.signum()))
                    } else {
                        None
                    }
                })
            })
            .collect()
    }

    /// CSV dump: `k_x,k_y,k_z,lambda,eps_x,eps_y,eps_z,weight`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k_x,k_y,k_z,lambda,eps_x,eps_y,eps_z,weight")?;
        for m in &self.modes {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                m.k.x, m.k.y, m.k.z, m.polarization, m.eps.x, m.eps.y, m.eps.z, m.weight
            )?;
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[a, b]` (Golub–Welsch).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let k = i as f64;
        let off = k / (4.0 * k * k - 1.0).sqrt();
        jac[(i, i - 1)] = off;
        jac[(i - 1, i)] = off;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    pairs.into_iter().map(|(x, w)| (mid + half * x, half * w)).unzip()
}

fn direction_list(set: &DirectionSet) -> Vec<Vec3> {
    let half: Vec<Vec3> = match set {
        DirectionSet::Axis => vec![Vec3::z()],
        DirectionSet::Octahedron => vec![Vec3::x(), Vec3::y(), Vec3::z()],
        DirectionSet::Cube => {
            let s = 1.0 / 3f64.sqrt();
            vec![
                Vec3::new(s, s, s),
                Vec3::new(s, s, -s),
                Vec3::new(s, -s, s),
                Vec3::new(-s, s, s),
            ]
        }
        DirectionSet::Icosahedron => {
            let phi = 0.5 * (1.0 + 5f64.sqrt());
            [
                Vec3::new(0.0, 1.0, phi),
                Vec3::new(0.0, 1.0, -phi),
                Vec3::new(1.0, phi, 0.0),
                Vec3::new(1.0, -phi, 0.0),
                Vec3::new(phi, 0.0, 1.0),
                Vec3::new(-phi, 0.0, 1.0),
            ]
            .iter()
            .map(|v| v.normalize())
            .collect()
        }
        DirectionSet::Custom(dirs) => dirs
            .iter()
            .map(|d| Vec3::new(d[0], d[1], d[2]))
            .filter(|d| d.norm() > 0.0)
            .map(|d| d.normalize())
            .collect(),
    };
    // each direction immediately followed by its antipode
    half.into_iter().flat_map(|d| [d, -d]).collect()
}

/// Deterministic mode list for the given grid.
pub fn build_mode_set(params: &ModelParams) -> Result<ModeSet> {
    params.validate()?;
    let dirs = direction_list(&params.grid.directions);
    if params.grid.shells == 0 || dirs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let (radii, radial_w) = gauss_legendre(params.grid.shells, params.grid.radial_floor, params.cutoff);
    let dir_w = 4.0 * PI / dirs.len() as f64;
    let mut modes = Vec::with_capacity(2 * radii.len() * dirs.len());
    for (r, wr) in radii.iter().zip(&radial_w) {
        for d in &dirs {
            let k = d * *r;
            let (e1, e2) = dreibein(&k)?;
            let weight = wr * r * r * dir_w;
            for (pol, eps) in [(1u8, e1), (2u8, e2)] {
                modes.push(Mode { k, polarization: pol, eps, weight });
            }
        }
    }
    Ok(ModeSet { modes })
}

/// Per-mode coupling data at `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormFactor {
    pub k: Vec3,
    /// `f_m = g_m · ε_m`, the coefficient of the discrete ladder operators.
    pub f: Vec3,
    /// Scalar prefactor `g_m = e √w_m χ(k) / √(2(2π)³ ω_m)`.
    pub g: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormFactorTable {
    pub entries: Vec<FormFactor>,
}

impl FormFactorTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.entries.iter().map(|f| f.omega).collect()
    }

    /// Component `j` of every `f_m`.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.entries.iter().map(|f| f.f[j]).collect()
    }
}

pub fn form_factors(modes: &ModeSet, params: &ModelParams) -> FormFactorTable {
    let norm = (2.0 * (2.0 * PI).powi(3)).sqrt();
    let entries = modes
        .modes
        .iter()
        .map(|m| {
            let omega = dispersion(&m.k, params.photon_mass);
            let env = params.envelope.factor(m.k.norm(), params.cutoff);
            let g = params.e * m.weight.sqrt() * env / (norm * omega.sqrt());
            FormFactor { k: m.k, f: m.eps * g, g, omega }
        })
        .collect();
    FormFactorTable { entries }
}

/// Discrete ℓ² norms of the form factors that enter the operator bounds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CouplingNorms {
    /// `‖ω^{-1/2}|F₀|‖`
    pub n_half: f64,
    /// `‖ω^{-1/2}F₀,ⱼ‖` per Cartesian component.
    pub n_half_component: [f64; 3],
    /// `‖(1+ω^{-1/2})|F₀|‖`
    pub n_one: f64,
    /// `‖(1+ω^{-1/2})F₀,ⱼ‖` per component.
    pub n_one_component: [f64; 3],
    /// `‖|k|^{1/2}|F₀|‖`
    pub n_kin: f64,
    /// `‖(1+ω^{-1/2})|k||F₀|‖`
    pub n_curl: f64,
}

pub fn coupling_norms(table: &FormFactorTable) -> CouplingNorms {
    let mut n_half = 0.0;
    let mut n_one = 0.0;
    let mut n_kin = 0.0;
    let mut n_curl = 0.0;
    let mut half_c = [0.0; 3];
    let mut one_c = [0.0; 3];
    for ff in &table.entries {
        let f2 = ff.f.norm_squared();
        let kn = ff.k.norm();
        let lift = (1.0 + ff.omega.powf(-0.5)).powi(2);
        n_half += f2 / ff.omega;
        n_one += lift * f2;
        n_kin += kn * f2;
        n_curl += lift * kn * kn * f2;
        for j in 0..3 {
            half_c[j] += ff.f[j] * ff.f[j] / ff.omega;
            one_c[j] += lift * ff.f[j] * ff.f[j];
        }
    }
    CouplingNorms {
        n_half: n_half.sqrt(),
        n_half_component: half_c.map(f64::sqrt),
        n_one: n_one.sqrt(),
        n_one_component: one_c.map(f64::sqrt),
        n_kin: n_kin.sqrt(),
        n_curl: n_curl.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::GridSpec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(&Vec3::zeros(), 0.3), 0.3);
        assert_eq!(dispersion(&Vec3::new(3.0, 0.0, 0.0), 4.0), 5.0);
        let k = Vec3::new(0.3, -0.4, 1.2);
        assert_eq!(dispersion(&k, 0.0), k.norm());
    }

    #[test]
    fn dreibein_pole_convention() {
        // fallback a = x̂: ε₁ = x̂ × ẑ = −ŷ, ε₂ = ẑ × (−ŷ) = x̂
        let (e1, e2) = dreibein(&Vec3::z()).unwrap();
        assert!((e1 - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
        assert!((e2 - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        let (e1, e2) = dreibein(&-Vec3::z()).unwrap();
        assert!((e1 - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        assert!((e2 - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-15);
        assert!(matches!(dreibein(&Vec3::zeros()), Err(Error::ZeroWavevector)));
    }

    #[test]
    fn dreibein_is_right_handed_frame() {
        for k in [
            Vec3::new(1.0, 2.0, 3.0),
            Vec3::new(-0.2, 0.0, 0.0),
            Vec3::new(0.0, 1e-12, 1.0),
            Vec3::new(0.0, 0.0, -7.0),
        ] {
            let (e1, e2) = dreibein(&k).unwrap();
            let kh = k.normalize();
            assert!(e1.dot(&k).abs() < 1e-14 * k.norm());
            assert!(e2.dot(&k).abs() < 1e-14 * k.norm());
            assert!(e1.dot(&e2).abs() < 1e-14);
            assert!(close(e1.norm(), 1.0, 1e-14) && close(e2.norm(), 1.0, 1e-14));
            assert!((kh.cross(&e1) - e2).norm() < 1e-14);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(4, 0.5, 2.0);
        // exact up to degree 7
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(7)).sum();
        let exact = (2f64.powi(8) - 0.5f64.powi(8)) / 8.0;
        assert!(close(integral, exact, 1e-12 * exact));
    }

    #[test]
    fn counting_and_closure() {
        let p = ModelParams::small();
        let ms = build_mode_set(&p).unwrap();
        assert_eq!(ms.len(), 4);
        let p = ModelParams::default();
        let ms = build_mode_set(&p).unwrap();
        assert_eq!(ms.len(), 24);
        let partners = ms.parity_partners().expect("closed under k -> -k");
        for (m, (j, _)) in partners.iter().enumerate() {
            assert_ne!(m, *j);
            assert!(ms.modes[m].k.norm() <= p.cutoff);
        }
        assert_eq!(ms, build_mode_set(&p).unwrap());
    }

    #[test]
    fn ball_volume() {
        // Σw over both polarizations counts the ball twice
        let p = ModelParams::default();
        let ms = build_mode_set(&p).unwrap();
        let d = p.grid.radial_floor;
        let exact = 4.0 / 3.0 * PI * (p.cutoff.powi(3) - d.powi(3));
        assert!(close(ms.total_weight() / 2.0, exact, 1e-12));
        assert!(close(ms.total_weight() / 2.0, 4.0 / 3.0 * PI, 1e-8));
    }

    #[test]
    fn empty_grid_rejected() {
        let p = ModelParams {
            grid: GridSpec { shells: 0, ..GridSpec::default() },
            ..ModelParams::default()
        };
        assert!(matches!(build_mode_set(&p), Err(Error::EmptyGrid)));
        let p = ModelParams {
            grid: GridSpec { directions: DirectionSet::Custom(vec![]), ..GridSpec::default() },
            ..ModelParams::default()
        };
        assert!(matches!(build_mode_set(&p), Err(Error::EmptyGrid)));
    }

    #[test]
    fn form_factor_magnitude_and_linearity() {
        let p = ModelParams::default();
        let ms = build_mode_set(&p).unwrap();
        let t = form_factors(&ms, &p);
        for (m, ff) in ms.modes.iter().zip(&t.entries) {
            let expect = p.e * m.weight.sqrt() / (2.0 * (2.0 * PI).powi(3) * ff.omega).sqrt();
            assert!(close(ff.f.norm(), expect, 1e-15));
            assert!(ff.omega >= p.photon_mass && ff.k.norm() <= ff.omega);
        }
        let t2 = form_factors(&ms, &p.with_coupling(2.0 * p.e));
        for (a, b) in t.entries.iter().zip(&t2.entries) {
            assert!((b.f - 2.0 * a.f).norm() < 1e-16);
        }
        let t0 = form_factors(&ms, &p.with_coupling(0.0));
        assert!(t0.entries.iter().all(|f| f.f == Vec3::zeros()));
        let n0 = coupling_norms(&t0);
        assert_eq!(n0.n_half + n0.n_one + n0.n_kin + n0.n_curl, 0.0);
    }

    #[test]
    fn n_half_matches_radial_integral() {
        // Σ_m |f_m|²/ω_m → e²/(2(2π)³) · 2 · 4π ∫₀^Λ k²/(k²+m²) dk
        //               = e²/(2π)³ · 4π (Λ − m·atan(Λ/m))
        let p = ModelParams {
            e: 0.3,
            grid: GridSpec { shells: 24, directions: DirectionSet::Octahedron, radial_floor: 1e-9 },
            ..ModelParams::default()
        };
        let t = form_factors(&build_mode_set(&p).unwrap(), &p);
        let n = coupling_norms(&t);
        let (l, m) = (p.cutoff, p.photon_mass);
        let exact = p.e * p.e / (2.0 * PI).powi(3) * 4.0 * PI * (l - m * (l / m).atan());
        assert!(close(n.n_half * n.n_half, exact, 1e-10 * exact));
    }

    #[test]
    fn norms_monotone_in_cutoff_and_coupling() {
        let base = ModelParams::default();
        let norms = |p: &ModelParams| coupling_norms(&form_factors(&build_mode_set(p).unwrap(), p));
        let a = norms(&base);
        let b = norms(&ModelParams { cutoff: 1.5, ..base.clone() });
        let c = norms(&base.with_coupling(0.1));
        for (x, y) in [(a, b), (a, c)] {
            assert!(y.n_half > x.n_half && y.n_one > x.n_one && y.n_kin > x.n_kin && y.n_curl > x.n_curl);
        }
        assert!(close(c.n_curl, 2.0 * a.n_curl, 1e-15));
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let p = ModelParams::small();
        let ms = build_mode_set(&p).unwrap();
        let mut buf = Vec::new();
        ms.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 5);
        assert!(s.starts_with("k_x,k_y,k_z,lambda,eps_x,eps_y,eps_z,weight\n"));
    }
}

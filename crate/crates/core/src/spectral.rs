//! Low-lying spectrum of `H(P)`: ground energy, first excited level,
//! degeneracy clusters and the one-photon emission gap
//! `Δ(P) = inf_k (E(P − k) + ω(k) − E(P))` over a finite trial set.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::FiberModel;
use crate::linalg::{self, c};
use crate::modes::dispersion;
use crate::params::{GridSpec, ModelParams};
use crate::{CMat, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralOptions {
    /// Relative tolerance for grouping eigenvalues into one level.
    pub degeneracy_tol: f64,
    /// Largest dimension handled by the dense eigensolver.
    pub dense_limit: usize,
    /// Eigenvalues requested first from the iterative solver.
    pub initial_count: usize,
    /// Cap when widening the request to find a level above the ground cluster.
    pub max_count: usize,
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            degeneracy_tol: 1e-8,
            dense_limit: 1500,
            initial_count: 8,
            max_count: 128,
            seed: 0x5eed,
        }
    }
}

/// Residual bound `‖Hv − λv‖ ≤ 1e-9‖H‖` required of every returned pair.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// The `m` smallest eigenvalues (ascending) with orthonormal eigenvectors.
pub fn low_spectrum(h: &CMat, m: usize, opts: &SpectralOptions) -> Result<(Vec<f64>, CMat)> {
    let n = h.nrows();
    let m = m.min(n);
    let (vals, vecs, norm) = if n <= opts.dense_limit {
        let (v, q) = linalg::eigh(h)?;
        let norm = v.first().map_or(0.0, |lo| lo.abs().max(v[n - 1].abs()));
        (v[..m].to_vec(), q.columns(0, m).into_owned(), norm)
    } else {
        let (v, q) = linalg::block_lanczos(h, m, 2, 1e-10, opts.seed)?;
        // largest column norm: a lower bound on ‖H‖, so the check stays strict
        let norm = h.column_iter().map(|col| col.norm()).fold(0.0, f64::max);
        (v, q, norm)
    };
    for j in 0..m {
        let r = (h * vecs.column(j) - vecs.column(j) * c(vals[j])).norm();
        if r > RESIDUAL_TOL * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Eigensolver(format!("residual {r:.3e} for eigenvalue {j}")));
        }
    }
    Ok((vals, vecs))
}

/// Greedy clustering of an ascending list: a value joins the current cluster
/// when it lies within `tol·max(1, |λ|)` of its predecessor. Each cluster is
/// reported by its first value.
pub fn cluster_degeneracy(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize)> = Vec::new();
    let mut prev = f64::NAN;
    for &v in values {
        match out.last_mut() {
            Some(last) if (v - prev).abs() <= tol * prev.abs().max(1.0) => last.1 += 1,
            _ => out.push((v, 1)),
        }
        prev = v;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundData {
    pub e: f64,
    /// First level strictly above the ground cluster.
    pub e1: f64,
    pub multiplicity: usize,
    /// Eigenvectors of the ground cluster, one column each.
    pub ground_vectors: CMat,
}

/// Ground energy, multiplicity and first excited level of a Hermitian
/// matrix, widening the eigenvalue request until a second level appears.
pub fn ground_data_of(h: &CMat, opts: &SpectralOptions) -> Result<GroundData> {
    let n = h.nrows();
    let mut m = opts.initial_count.max(2);
    loop {
        let count = if n <= opts.dense_limit { n } else { m.min(n) };
        let (vals, vecs) = low_spectrum(h, count, opts)?;
        let clusters = cluster_degeneracy(&vals, opts.degeneracy_tol);
        if clusters.len() >= 2 {
            let mult = clusters[0].1;
            return Ok(GroundData {
                e: vals[0],
                e1: clusters[1].0,
                multiplicity: mult,
                ground_vectors: vecs.columns(0, mult).into_owned(),
            });
        }
        if count >= n || m >= opts.max_count {
            return Err(Error::SpectrumExhausted { computed: count });
        }
        m *= 2;
    }
}

pub fn ground_data(model: &FiberModel, p: &Vec3, opts: &SpectralOptions) -> Result<GroundData> {
    ground_data_of(model.h(p)?.matrix(), opts)
}

/// `E(P)` memo keyed by `P` quantized to `1e-12`. Values are deterministic,
/// so concurrent writers of the same key store identical numbers.
#[derive(Debug, Default)]
pub struct EnergyCache {
    map: Mutex<HashMap<[i64; 3], f64>>,
}

fn quantize(p: &Vec3) -> [i64; 3] {
    [0, 1, 2].map(|j| (p[j] * 1e12).round() as i64)
}

impl EnergyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ground_energy(&self, model: &FiberModel, p: &Vec3, opts: &SpectralOptions) -> Result<f64> {
        let key = quantize(p);
        if let Some(&e) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(e);
        }
        let h = model.h(p)?;
        let e = if h.dim() <= opts.dense_limit {
            linalg::min_eigenvalue(h.matrix())?
        } else {
            low_spectrum(h.matrix(), 2, opts)?.0[0]
        };
        self.map.lock().expect("cache lock").insert(key, e);
        Ok(e)
    }
}

/// `{0} ∪ {mode wavevectors} ∪ extra`.
pub fn trial_set(model: &FiberModel, extra: &[Vec3]) -> Vec<Vec3> {
    let mut out = vec![Vec3::zeros()];
    out.extend(model.modes().modes.iter().map(|m| m.k));
    out.extend_from_slice(extra);
    out
}

/// `min_k (E(P − k) + ω(k) − E(P))` over the trial wavevectors.
pub fn delta_gap(
    model: &FiberModel,
    p: &Vec3,
    trial: &[Vec3],
    cache: &EnergyCache,
    opts: &SpectralOptions,
) -> Result<f64> {
    let e = cache.ground_energy(model, p, opts)?;
    let mut best = f64::INFINITY;
    for k in trial {
        let omega = dispersion(k, model.params().photon_mass);
        let ek = cache.ground_energy(model, &(p - k), opts)?;
        best = best.min(ek + omega - e);
    }
    Ok(best)
}

/// Per-`P` spectral summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub p: [f64; 3],
    pub e: f64,
    pub e1: f64,
    pub ground_multiplicity: usize,
    pub delta: f64,
    pub sigma_minus: f64,
    pub eigencount_below_sigma: usize,
    pub residuals: BTreeMap<String, f64>,
}

/// Assembles a [`SpectrumReport`]: spectrum, gap, `Σ₋(P)` and the count of
/// eigenvalues below it, plus the Kramers and sandwich residuals at `P`.
pub fn spectrum_report(
    model: &FiberModel,
    p: &Vec3,
    trial: &[Vec3],
    cache: &EnergyCache,
    opts: &SpectralOptions,
) -> Result<SpectrumReport> {
    use crate::bounds;
    let h = model.h(p)?;
    let gd = ground_data_of(h.matrix(), opts)?;
    let delta = delta_gap(model, p, trial, cache, opts)?;
    let consts = bounds::BoundConstants::from_model(model);
    let sigma_minus = consts.sigma_minus(p.norm());
    let count = bounds::count_below_with(h.matrix(), sigma_minus, opts)?;

    let mut residuals = BTreeMap::new();
    residuals.insert("theta_commutation".into(), crate::kramers::check_theta_commutes(&h));
    let pu = Vec3::new(p.norm(), 0.0, 0.0);
    let hu = model.h(&pu)?;
    if model.params().gamma < 1.0 {
        let lm = bounds::build_l_minus(model, p.norm(), &consts)?;
        residuals.insert("lower_sandwich_min_eig".into(), bounds::check_op_leq(&lm, hu.matrix(), 1e-9)?.min_eig);
    }
    let lp = bounds::build_l_plus(model, p.norm())?;
    residuals.insert("upper_sandwich_min_eig".into(), bounds::check_op_leq(hu.matrix(), &lp, 1e-9)?.min_eig);

    Ok(SpectrumReport {
        p: [p[0], p[1], p[2]],
        e: gd.e,
        e1: gd.e1,
        ground_multiplicity: gd.multiplicity,
        delta,
        sigma_minus,
        eigencount_below_sigma: count,
        residuals,
    })
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_max: usize,
    pub n_modes: usize,
    pub fock_dim: usize,
    pub e: f64,
    /// `E` minus the previous rung's `E` (absent on the first rung).
    pub diff: Option<f64>,
}

/// `E(P)` along a ladder of `(N_max, grid)` refinements.
pub fn convergence_study(
    p: &Vec3,
    params: &ModelParams,
    ladder: &[(usize, GridSpec)],
    opts: &SpectralOptions,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(ladder.len());
    for (n_max, grid) in ladder {
        let rung = ModelParams { n_max: *n_max, grid: grid.clone(), ..params.clone() };
        let model = FiberModel::new(&rung)?;
        let h = model.h(p)?;
        let e = if h.dim() <= opts.dense_limit {
            linalg::min_eigenvalue(h.matrix())?
        } else {
            low_spectrum(h.matrix(), 2, opts)?.0[0]
        };
        let diff = rows.last().map(|r| e - r.e);
        rows.push(ConvergenceRow { n_max: *n_max, n_modes: model.modes().len(), fock_dim: model.dim(), e, diff });
    }
    Ok(rows)
}

/// Spread `max − min` of `E` over points of equal `|P|` along the given
/// directions. Exact rotation covariance is lost on a finite grid, so this
/// is a diagnostic, not a check.
pub fn radial_deviation(model: &FiberModel, p_abs: f64, directions: &[Vec3], cache: &EnergyCache, opts: &SpectralOptions) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for d in directions {
        let e = cache.ground_energy(model, &(d.normalize() * p_abs), opts)?;
        lo = lo.min(e);
        hi = hi.max(e);
    }
    Ok(if directions.is_empty() { 0.0 } else { hi - lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::real_diagonal;

    fn small(e: f64) -> FiberModel {
        FiberModel::new(&ModelParams::small().with_coupling(e)).unwrap()
    }

    /// Every eigenvalue of the free fiber Hamiltonian, by direct enumeration.
    fn free_levels(model: &FiberModel, p: &Vec3) -> Vec<f64> {
        let prm = model.params();
        let mut out = Vec::new();
        for s in model.basis().states() {
            let mut q = *p;
            let mut field = 0.0;
            for (n, md) in s.iter().zip(&model.modes().modes) {
                q -= md.k * *n as f64;
                field += *n as f64 * dispersion(&md.k, prm.photon_mass);
            }
            let level = prm.gamma * (q.norm_squared() + prm.mass * prm.mass).sqrt() + field;
            out.extend([level, level]);
        }
        out.sort_by(f64::total_cmp);
        out
    }

    #[test]
    fn low_spectrum_of_diagonal() {
        let (v, _) = low_spectrum(&real_diagonal(&[3.0, 1.0, 2.0]), 2, &SpectralOptions::default()).unwrap();
        assert_eq!(v, vec![1.0, 2.0]);
    }

    #[test]
    fn clustering() {
        assert_eq!(cluster_degeneracy(&[1.0, 1.0 + 1e-12, 2.0], 1e-9), vec![(1.0, 2), (2.0, 1)]);
        assert_eq!(cluster_degeneracy(&[0.0, 1.0, 2.0], 1e-9).len(), 3);
        assert!(cluster_degeneracy(&[], 1e-9).is_empty());
    }

    #[test]
    fn free_spectrum_matches_enumeration() {
        let m = small(0.0);
        let opts = SpectralOptions::default();
        for px in [0.0, 0.4, 1.3] {
            let pv = Vec3::new(px, 0.1, -0.2);
            let h = m.h(&pv).unwrap();
            let (vals, vecs) = low_spectrum(h.matrix(), h.dim(), &opts).unwrap();
            for (a, b) in vals.iter().zip(free_levels(&m, &pv)) {
                assert!((a - b).abs() < 1e-10);
            }
            let gram = vecs.adjoint() * &vecs;
            assert!((gram - CMat::identity(h.dim(), h.dim())).norm() < 1e-10);
            for (_, mult) in cluster_degeneracy(&vals, 1e-8) {
                assert_eq!(mult % 2, 0);
            }
        }
    }

    #[test]
    fn free_ground_data_at_rest() {
        let m = small(0.0);
        let gd = ground_data(&m, &Vec3::zeros(), &SpectralOptions::default()).unwrap();
        assert!((gd.e - 0.5).abs() < 1e-12);
        assert_eq!(gd.multiplicity, 2);
        let cheapest = m
            .modes()
            .modes
            .iter()
            .map(|md| 0.5 * (md.k.norm_squared() + 1.0).sqrt() + dispersion(&md.k, 0.5))
            .fold(f64::INFINITY, f64::min);
        assert!((gd.e1 - cheapest).abs() < 1e-12);
    }

    #[test]
    fn kramers_pair_at_small_coupling_and_parity() {
        let m = small(0.1);
        let opts = SpectralOptions::default();
        let pv = Vec3::new(0.6, 0.2, -0.3);
        let gd = ground_data(&m, &pv, &opts).unwrap();
        assert_eq!(gd.multiplicity, 2);
        assert!(gd.e < gd.e1);
        let cache = EnergyCache::new();
        let a = cache.ground_energy(&m, &pv, &opts).unwrap();
        let b = cache.ground_energy(&m, &(-pv), &opts).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert_eq!(cache.len(), 2);
    }

    #[test]
    fn free_gap_matches_closed_form() {
        let m = small(0.0);
        let opts = SpectralOptions::default();
        let cache = EnergyCache::new();
        let pv = Vec3::new(0.8, 0.0, 0.0);
        let trial = trial_set(&m, &[Vec3::new(0.3, 0.1, 0.0)]);
        let d = delta_gap(&m, &pv, &trial, &cache, &opts).unwrap();
        let f = |q: &Vec3| 0.5 * (q.norm_squared() + 1.0).sqrt();
        let expect = trial
            .iter()
            .map(|k| f(&(pv - k)) + dispersion(k, 0.5) - f(&pv))
            .fold(f64::INFINITY, f64::min);
        assert!((d - expect).abs() < 1e-10);
        assert!(d <= 0.5 + 1e-12);
        assert!(d >= 0.25 - 1e-12);
    }

    #[test]
    fn larger_trial_set_never_raises_gap() {
        let m = small(0.1);
        let opts = SpectralOptions::default();
        let cache = EnergyCache::new();
        let pv = Vec3::new(0.5, 0.0, 0.0);
        let sub = trial_set(&m, &[]);
        let sup = trial_set(&m, &[Vec3::new(0.2, 0.0, 0.0), Vec3::new(-0.4, 0.1, 0.0)]);
        let a = delta_gap(&m, &pv, &sub, &cache, &opts).unwrap();
        let b = delta_gap(&m, &pv, &sup, &cache, &opts).unwrap();
        assert!(b <= a && a > 0.0);
    }

    #[test]
    fn iterative_path_matches_dense() {
        let m = small(0.1);
        let h = m.h(&Vec3::new(0.3, 0.0, 0.0)).unwrap();
        let dense = ground_data_of(h.matrix(), &SpectralOptions::default()).unwrap();
        let iter_opts = SpectralOptions { dense_limit: 4, ..SpectralOptions::default() };
        let lanczos = ground_data_of(h.matrix(), &iter_opts).unwrap();
        assert!((dense.e - lanczos.e).abs() < 1e-9);
        assert!((dense.e1 - lanczos.e1).abs() < 1e-9);
        assert_eq!(dense.multiplicity, lanczos.multiplicity);
    }

    #[test]
    fn convergence_ladder() {
        let base = ModelParams::small();
        let grid = base.grid.clone();
        let ladder: Vec<_> = (0..=3).map(|n| (n, grid.clone())).collect();
        let pv = Vec3::new(0.5, 0.0, 0.0);
        let opts = SpectralOptions::default();
        let free = convergence_study(&pv, &base.with_coupling(0.0), &ladder, &opts).unwrap();
        assert!(free.iter().all(|r| (r.e - free[0].e).abs() < 1e-13));
        let rows = convergence_study(&pv, &base.with_coupling(0.2), &ladder, &opts).unwrap();
        assert_eq!(rows[0].fock_dim, 1);
        assert!(rows[0].diff.is_none());
        // vacuum-only rung: 2×2 matrix on the spin space
        let m0 = FiberModel::new(&ModelParams { n_max: 0, ..base.with_coupling(0.2) }).unwrap();
        let h = m0.h(&pv).unwrap();
        assert_eq!(h.dim(), 2);
        assert!((linalg::min_eigenvalue(h.matrix()).unwrap() - rows[0].e).abs() < 1e-14);
    }

    #[test]
    fn report_serializes() {
        let m = small(0.05);
        let opts = SpectralOptions::default();
        let cache = EnergyCache::new();
        let pv = Vec3::new(0.4, 0.0, 0.0);
        let r = spectrum_report(&m, &pv, &trial_set(&m, &[]), &cache, &opts).unwrap();
        assert_eq!(r.ground_multiplicity, 2);
        assert!(r.delta <= 0.5 + 1e-12);
        let json = serde_json::to_string(&r).unwrap();
        let back: SpectrumReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}

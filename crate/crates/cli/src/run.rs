//! Task runners. Each writes its files under `out_dir` and returns the list
//! of hard failures; the binary maps a non-empty list to exit code 1.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context as _, Result};
use rayon::prelude::*;
use serde::Serialize;
use srpf_core::bounds::{self, BoundConstants, LeqCheck};
use srpf_core::fock::field_bound_suite;
use srpf_core::hamiltonian::{FiberModel, TForm};
use srpf_core::kramers::{self, CertificateStatus, KramersCertificate};
use srpf_core::linalg::{self, relative_frobenius, sqrt_pd_quad, sqrt_psd};
use srpf_core::spectral::{self, EnergyCache, SpectrumReport};
use srpf_core::{CMat, Vec3};

use crate::cache::{CacheKeyer, ResultCache};
use crate::config::{RunConfig, Task};

/// Size of the `σ₃ ⊗ 1` term added by `inject_symmetry_breaking`.
pub const SYMMETRY_BREAKING: f64 = 1e-3;

#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn merge(&mut self, other: Outcome) {
        self.failures.extend(other.failures);
        self.files.extend(other.files);
    }
}

pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Model, constants and caches shared by every task of one run.
pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub model: FiberModel,
    pub consts: BoundConstants,
    pub trial: Vec<Vec3>,
    keyer: CacheKeyer,
    pub cache: ResultCache,
    energies: EnergyCache,
    pool: rayon::ThreadPool,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self> {
        let model = FiberModel::new(&cfg.params)?;
        let consts = BoundConstants::from_model(&model);
        let extra = cfg.trial_extra();
        let trial = spectral::trial_set(&model, &extra);
        let cache = match &cfg.cache_path {
            Some(p) => ResultCache::open(p)?,
            None => ResultCache::ephemeral(),
        };
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cfg.threads {
            builder = builder.num_threads(n);
        }
        Ok(Context {
            cfg,
            keyer: CacheKeyer::new(&cfg.params, &cfg.spectral, &extra),
            model,
            consts,
            trial,
            cache,
            energies: EnergyCache::new(),
            pool: builder.build()?,
        })
    }

    /// Spectrum reports in `ps` order; failures stay per point.
    pub fn reports(&self, ps: &[Vec3]) -> Vec<std::result::Result<SpectrumReport, String>> {
        self.pool.install(|| {
            ps.par_iter()
                .map(|p| {
                    let key = self.keyer.key(p);
                    if let Some(hit) = self.cache.get(&key) {
                        return Ok(hit);
                    }
                    let r = spectral::spectrum_report(&self.model, p, &self.trial, &self.energies, &self.cfg.spectral)
                        .map_err(|e| e.to_string())?;
                    self.cache.insert(key, r.clone());
                    Ok(r)
                })
                .collect()
        })
    }

    fn par_map<T: Send>(&self, ps: &[Vec3], f: impl Fn(&Vec3) -> T + Sync + Send) -> Vec<T> {
        self.pool.install(|| ps.par_iter().map(f).collect())
    }

    fn out(&self, name: &str) -> Result<PathBuf> {
        let path = self.cfg.out_dir.join(name);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(path)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

pub const SPECTRUM_HEADER: [&str; 9] = ["P_x", "P_y", "P_z", "E", "E1", "mult", "delta", "sigma_minus", "count_below"];

fn spectrum_row(p: &Vec3, r: &std::result::Result<SpectrumReport, String>) -> Vec<String> {
    let mut row: Vec<String> = (0..3).map(|j| fmt_f(p[j])).collect();
    match r {
        Ok(r) => row.extend([
            fmt_f(r.e),
            fmt_f(r.e1),
            r.ground_multiplicity.to_string(),
            fmt_f(r.delta),
            fmt_f(r.sigma_minus),
            r.eigencount_below_sigma.to_string(),
        ]),
        Err(_) => row.extend(std::iter::repeat_n(String::new(), 6)),
    }
    row
}

#[derive(Serialize)]
struct PointFile<'a> {
    index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a SpectrumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

/// `spectrum.csv` plus `spectrum/point_NNNN.json` for every `P`.
pub fn run_spectrum(ctx: &Context) -> Result<Outcome> {
    let ps = ctx.cfg.momenta();
    let reports = ctx.reports(&ps);
    let mut out = Outcome::default();
    let rows: Vec<Vec<String>> = ps.iter().zip(&reports).map(|(p, r)| spectrum_row(p, r)).collect();
    let csv_path = ctx.out("spectrum.csv")?;
    write_csv(&csv_path, &SPECTRUM_HEADER, &rows)?;
    out.files.push(csv_path);
    for (i, (p, r)) in ps.iter().zip(&reports).enumerate() {
        let path = ctx.out(&format!("spectrum/point_{i:04}.json"))?;
        let file = match r {
            Ok(rep) => PointFile { index: i, report: Some(rep), error: None },
            Err(e) => {
                out.failures.push(format!("spectrum at P = {:?}: {e}", [p[0], p[1], p[2]]));
                PointFile { index: i, report: None, error: Some(e) }
            }
        };
        write_json(&path, &file)?;
        out.files.push(path);
    }
    ctx.cache.flush()?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub p: [f64; 3],
}

fn track(slot: &mut Option<Extremum>, value: f64, p: &Vec3) {
    if slot.is_none_or(|s| value < s.value) {
        *slot = Some(Extremum { value, p: [p[0], p[1], p[2]] });
    }
}

#[derive(Debug, Serialize)]
pub struct SweepSummary {
    pub points: usize,
    pub failed_points: usize,
    pub hypotheses_met: bool,
    pub constants: BoundConstants,
    /// `(1−γ)m_ph − eĉ`, the floor for `Δ(P)`.
    pub delta_floor: f64,
    /// `(1−eC₁−γ)m_ph − eĉ`, the floor for `E₁ − E`.
    pub excitation_floor: f64,
    pub min_gap: Option<Extremum>,
    pub min_delta: Option<Extremum>,
    pub min_delta_margin: Option<Extremum>,
    pub min_excitation_margin: Option<Extremum>,
    pub min_floor_margin: Option<Extremum>,
    pub min_chain_margin: Option<Extremum>,
}

pub const SWEEP_EXTRA: [&str; 7] =
    ["gap", "env_lower", "env_upper", "delta_margin", "excitation_margin", "floor_margin", "chain_margin"];

/// Spectrum columns plus bound columns, and a min-over-`P` summary. Margins
/// are reported, not asserted.
pub fn run_sweep(ctx: &Context) -> Result<Outcome> {
    let ps = ctx.cfg.momenta();
    let reports = ctx.reports(&ps);
    let k = &ctx.consts;
    let mut out = Outcome::default();
    let mut summary = SweepSummary {
        points: ps.len(),
        failed_points: 0,
        hypotheses_met: ctx.cfg.params.gap_hypotheses_met(),
        constants: *k,
        delta_floor: (1.0 - k.gamma) * k.photon_mass - k.gap_erosion(),
        excitation_floor: (1.0 - k.ec1 - k.gamma) * k.photon_mass - k.gap_erosion(),
        min_gap: None,
        min_delta: None,
        min_delta_margin: None,
        min_excitation_margin: None,
        min_floor_margin: None,
        min_chain_margin: None,
    };
    let mut rows = Vec::with_capacity(ps.len());
    for (p, r) in ps.iter().zip(&reports) {
        let mut row = spectrum_row(p, r);
        match r {
            Ok(r) => {
                let (lo, hi) = k.corollary_energy_bounds(p.norm());
                let g = bounds::theorem_gap_report(p.norm(), r.e, r.e1, r.delta, k);
                row.extend(
                    [r.e1 - r.e, lo, hi, g.delta_margin, g.excitation_margin, g.floor_margin, g.chain_margin].map(fmt_f),
                );
                track(&mut summary.min_gap, r.e1 - r.e, p);
                track(&mut summary.min_delta, r.delta, p);
                track(&mut summary.min_delta_margin, g.delta_margin, p);
                track(&mut summary.min_excitation_margin, g.excitation_margin, p);
                track(&mut summary.min_floor_margin, g.floor_margin, p);
                track(&mut summary.min_chain_margin, g.chain_margin, p);
            }
            Err(e) => {
                summary.failed_points += 1;
                out.failures.push(format!("sweep at P = {:?}: {e}", [p[0], p[1], p[2]]));
                row.extend(std::iter::repeat_n(String::new(), SWEEP_EXTRA.len()));
            }
        }
        rows.push(row);
    }
    let header: Vec<&str> = SPECTRUM_HEADER.iter().chain(SWEEP_EXTRA.iter()).copied().collect();
    let csv_path = ctx.out("sweep.csv")?;
    write_csv(&csv_path, &header, &rows)?;
    let json_path = ctx.out("sweep_summary.json")?;
    write_json(&json_path, &summary)?;
    out.files.extend([csv_path, json_path]);
    ctx.cache.flush()?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsRow {
    pub p: [f64; 3],
    pub e: f64,
    pub e1: f64,
    pub env_lower: f64,
    pub env_upper: f64,
    pub sigma_minus: f64,
    pub count_below: usize,
    /// Absent when `γ = 1`, where the lower comparison operator is undefined.
    pub lower_sandwich: Option<LeqCheck>,
    pub upper_sandwich: LeqCheck,
}

fn bounds_row(ctx: &Context, p: &Vec3) -> srpf_core::Result<BoundsRow> {
    let m = &ctx.model;
    let k = &ctx.consts;
    let tol = ctx.cfg.tolerances.sandwich;
    let pa = p.norm();
    let h = m.h(p)?;
    let gd = spectral::ground_data_of(h.matrix(), &ctx.cfg.spectral)?;
    let hu = m.h(&Vec3::new(pa, 0.0, 0.0))?;
    let lower = if m.params().gamma < 1.0 {
        Some(bounds::check_op_leq(&bounds::build_l_minus(m, pa, k)?, hu.matrix(), tol)?)
    } else {
        None
    };
    let upper = bounds::check_op_leq(hu.matrix(), &bounds::build_l_plus(m, pa)?, tol)?;
    let sigma = k.sigma_minus(pa);
    let (lo, hi) = k.corollary_energy_bounds(pa);
    Ok(BoundsRow {
        p: [p[0], p[1], p[2]],
        e: gd.e,
        e1: gd.e1,
        env_lower: lo,
        env_upper: hi,
        sigma_minus: sigma,
        count_below: bounds::count_below_with(h.matrix(), sigma, &ctx.cfg.spectral)?,
        lower_sandwich: lower,
        upper_sandwich: upper,
    })
}

/// Hard failures of one bounds row: sandwich, envelope, and (under the gap
/// hypotheses) the min-max count.
fn bounds_failures(ctx: &Context, r: &BoundsRow) -> Vec<String> {
    let tol = ctx.cfg.tolerances.energy;
    let mut bad = Vec::new();
    let at = format!("P = {:?}", r.p);
    if r.lower_sandwich.is_some_and(|c| !c.holds) {
        bad.push(format!("lower sandwich fails at {at}"));
    }
    if !r.upper_sandwich.holds {
        bad.push(format!("upper sandwich fails at {at}"));
    }
    if r.e < r.env_lower - tol || r.e > r.env_upper + tol {
        bad.push(format!("E = {} outside [{}, {}] at {at}", r.e, r.env_lower, r.env_upper));
    }
    if ctx.cfg.params.gap_hypotheses_met() && (r.count_below != 2 || !(r.e < r.sigma_minus && r.sigma_minus <= r.e1)) {
        bad.push(format!("{} eigenvalues below Σ₋ = {} at {at}", r.count_below, r.sigma_minus));
    }
    bad
}

fn opt_f(x: Option<f64>) -> String {
    x.map(fmt_f).unwrap_or_default()
}

pub fn run_bounds(ctx: &Context) -> Result<Outcome> {
    let ps = ctx.cfg.momenta();
    let rows = ctx.par_map(&ps, |p| bounds_row(ctx, p));
    let mut out = Outcome::default();
    let mut ok = Vec::new();
    let mut csv_rows = Vec::new();
    for (p, r) in ps.iter().zip(rows) {
        match r {
            Ok(r) => {
                out.failures.extend(bounds_failures(ctx, &r));
                csv_rows.push(vec![
                    fmt_f(p[0]),
                    fmt_f(p[1]),
                    fmt_f(p[2]),
                    fmt_f(r.e),
                    fmt_f(r.e1),
                    fmt_f(r.env_lower),
                    fmt_f(r.env_upper),
                    fmt_f(r.sigma_minus),
                    r.count_below.to_string(),
                    opt_f(r.lower_sandwich.map(|c| c.min_eig / c.scale)),
                    fmt_f(r.upper_sandwich.min_eig / r.upper_sandwich.scale),
                ]);
                ok.push(r);
            }
            Err(e) => out.failures.push(format!("bounds at P = {:?}: {e}", [p[0], p[1], p[2]])),
        }
    }
    let header = [
        "P_x", "P_y", "P_z", "E", "E1", "env_lower", "env_upper", "sigma_minus", "count_below",
        "lower_sandwich_rel", "upper_sandwich_rel",
    ];
    let csv_path = ctx.out("bounds.csv")?;
    write_csv(&csv_path, &header, &csv_rows)?;
    let json_path = ctx.out("bounds.json")?;
    write_json(&json_path, &serde_json::json!({ "constants": ctx.consts, "rows": ok }))?;
    out.files.extend([csv_path, json_path]);
    Ok(out)
}

fn certificate_failure(c: &KramersCertificate) -> Option<String> {
    (c.status == CertificateStatus::Failed).then(|| {
        format!(
            "Kramers certificate failed at P = {:?}: multiplicity {}, count below Σ₋ {:?}",
            c.p, c.ground_multiplicity, c.count_below_sigma
        )
    })
}

pub fn run_kramers(ctx: &Context) -> Result<Outcome> {
    let ps = ctx.cfg.momenta();
    let certs = ctx.par_map(&ps, |p| kramers::kramers_certificate(&ctx.model, p, &ctx.cfg.spectral));
    let mut out = Outcome::default();
    let mut ok = Vec::new();
    for (p, c) in ps.iter().zip(certs) {
        match c {
            Ok(c) => {
                out.failures.extend(certificate_failure(&c));
                ok.push(c);
            }
            Err(e) => out.failures.push(format!("kramers at P = {:?}: {e}", [p[0], p[1], p[2]])),
        }
    }
    let path = ctx.out("kramers.json")?;
    write_json(&path, &ok)?;
    out.files.push(path);
    Ok(out)
}

pub fn run_convergence(ctx: &Context) -> Result<Outcome> {
    let c = &ctx.cfg.convergence;
    let ladder: Vec<_> = c.rungs.iter().map(|r| (r.n_max, r.grid.clone())).collect();
    let p = Vec3::new(c.p[0], c.p[1], c.p[2]);
    let rows = spectral::convergence_study(&p, &ctx.cfg.params, &ladder, &ctx.cfg.spectral)?;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![r.n_max.to_string(), r.n_modes.to_string(), r.fock_dim.to_string(), fmt_f(r.e), opt_f(r.diff)]
        })
        .collect();
    let path = ctx.out("convergence.csv")?;
    write_csv(&path, &["n_max", "n_modes", "fock_dim", "E", "diff"], &csv_rows)?;
    Ok(Outcome { failures: Vec::new(), files: vec![path] })
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// Hard checks decide the exit code; soft ones are reported only.
    pub hard: bool,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub symmetry_breaking_injected: bool,
    pub checks: Vec<Check>,
}

struct Checks(Vec<Check>);

impl Checks {
    fn hard(&mut self, name: &str, passed: bool, value: f64, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), hard: true, passed, value, detail: detail.into() });
    }

    fn soft(&mut self, name: &str, passed: bool, value: f64, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), hard: false, passed, value, detail: detail.into() });
    }
}

fn worst(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// `H(P)`, with the negative-control perturbation if requested.
fn symmetry_probe(ctx: &Context, p: &Vec3) -> srpf_core::Result<CMat> {
    let h = ctx.model.h(p)?.into_matrix();
    if !ctx.cfg.verify.inject_symmetry_breaking {
        return Ok(h);
    }
    let s3 = linalg::real_diagonal(&[SYMMETRY_BREAKING, -SYMMETRY_BREAKING]);
    let n = ctx.model.dim();
    Ok(h + linalg::kron_small(&s3, &CMat::identity(n, n)))
}

struct AlgebraPoint {
    dirac_square: f64,
    t_forms: f64,
    sqrt_quad: f64,
    theta: f64,
    odd_levels: usize,
    parity: f64,
}

fn algebra_point(ctx: &Context, p: &Vec3) -> srpf_core::Result<AlgebraPoint> {
    let m = &ctx.model;
    let d2 = m.dirac_squared(p);
    let tm = m.t_plus_mass(p);
    let n = 2 * m.dim();
    let mut expect = CMat::zeros(2 * n, 2 * n);
    expect.view_mut((0, 0), (n, n)).copy_from(&tm);
    expect.view_mut((n, n), (n, n)).copy_from(&tm);
    let dirac_square = (d2.matrix() - expect).norm() / d2.matrix().norm();
    let t_forms = relative_frobenius(m.t(p, TForm::Direct).matrix(), m.t(p, TForm::Expanded).matrix());
    let sqrt_quad = worst((sqrt_pd_quad(&tm, 1e-9)? - sqrt_psd(&tm)?).iter().map(|z| z.norm()));

    let h = symmetry_probe(ctx, p)?;
    let theta = kramers::theta_residual(&h);
    let vals = linalg::eigvalsh(&h)?;
    let odd_levels = spectral::cluster_degeneracy(&vals, ctx.cfg.spectral.degeneracy_tol)
        .iter()
        .filter(|(_, mult)| mult % 2 == 1)
        .count();
    let e_minus = linalg::min_eigenvalue(&symmetry_probe(ctx, &(-p))?)?;
    Ok(AlgebraPoint { dirac_square, t_forms, sqrt_quad, theta, odd_levels, parity: (vals[0] - e_minus).abs() })
}

fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Runs every invariant suite on the configured model and ladder and writes
/// `verify.json`.
pub fn run_verify(ctx: &Context) -> Result<Outcome> {
    let cfg = ctx.cfg;
    let tol = &cfg.tolerances;
    let ps = cfg.momenta();
    let m = &ctx.model;
    let mut checks = Checks(Vec::new());

    let theta_sq = kramers::theta_squared_residual(2 * m.dim())?;
    checks.hard("theta_squared", theta_sq == 0.0, theta_sq, "θ² + 1 on the spinor basis");
    let reality = kramers::check_reality_relations(m).max();
    checks.hard("reality_relations", reality <= tol.theta, reality, "θ-conjugation of P_f, A(0), B(0), H_f");

    let alg: Vec<AlgebraPoint> = ctx.par_map(&ps, |p| algebra_point(ctx, p)).into_iter().collect::<srpf_core::Result<_>>()?;
    let v = worst(alg.iter().map(|a| a.dirac_square));
    checks.hard("dirac_square", v <= tol.dirac_square, v, "‖D² − (T+M²)⊕(T+M²)‖_F / ‖D²‖_F");
    let v = worst(alg.iter().map(|a| a.t_forms));
    checks.hard("t_direct_vs_expanded", v <= tol.t_forms, v, "relative Frobenius distance");
    let v = worst(alg.iter().map(|a| a.sqrt_quad));
    checks.hard("sqrt_quadrature_vs_eigen", v <= tol.sqrt_quad, v, "max entry of √(T+M²) difference");
    let v = worst(alg.iter().map(|a| a.theta));
    checks.hard("theta_commutation", v <= tol.theta, v, "‖θH − Hθ‖_F");
    let odd: usize = alg.iter().map(|a| a.odd_levels).sum();
    checks.hard("even_multiplicities", odd == 0, odd as f64, format!("{odd} levels of odd multiplicity"));
    let v = worst(alg.iter().map(|a| a.parity));
    checks.hard("parity", v <= 1e-10, v, "max |E(P) − E(−P)|");

    let rows: Vec<BoundsRow> = ctx.par_map(&ps, |p| bounds_row(ctx, p)).into_iter().collect::<srpf_core::Result<_>>()?;
    let bad: Vec<String> = rows.iter().flat_map(|r| bounds_failures(ctx, r)).collect();
    let v = rows
        .iter()
        .map(|r| (r.e - r.env_lower).min(r.env_upper - r.e))
        .fold(f64::INFINITY, f64::min);
    checks.hard("sandwich_envelope_counting", bad.is_empty(), if v.is_finite() { v } else { 0.0 }, format!("{bad:?}"));

    let certs: Vec<KramersCertificate> = ctx
        .par_map(&ps, |p| kramers::kramers_certificate(m, p, &cfg.spectral))
        .into_iter()
        .collect::<srpf_core::Result<_>>()?;
    let failed: Vec<String> = certs.iter().filter_map(certificate_failure).collect();
    let status = certs.first().map_or("none".to_string(), |c| format!("{:?}", c.status));
    checks.hard("kramers_certificate", failed.is_empty(), failed.len() as f64, format!("first status {status}; {failed:?}"));
    let inconclusive = certs.iter().filter(|c| c.status == CertificateStatus::Inconclusive).count();
    checks.soft("kramers_conclusive", inconclusive == 0, inconclusive as f64, "certificates without a multiplicity upper bound");

    let fb = field_bound_suite(&m.table().omegas(), cfg.params.n_max, cfg.verify.field_samples, cfg.seed)?;
    checks.hard("field_operator_bounds", fb.passed(), fb.matrix_form_min_eig, format!("violations {:?}", fb.violations));
    let mono = bounds::sqrt_monotone_test(cfg.verify.monotone_dim, cfg.verify.monotone_trials, cfg.seed)?;
    checks.hard("sqrt_monotone", mono.passed(), mono.worst_margin, format!("{} violations in {} trials", mono.violations, mono.trials));

    // margins below are estimates with unspecified O(e²) corrections
    let reports: Vec<SpectrumReport> = ctx.reports(&ps).into_iter().collect::<std::result::Result<_, String>>().map_err(anyhow::Error::msg)?;
    let mut margins: BTreeMap<&str, f64> = BTreeMap::new();
    for (p, r) in ps.iter().zip(&reports) {
        let g = bounds::theorem_gap_report(p.norm(), r.e, r.e1, r.delta, &ctx.consts);
        for (name, val) in [("delta", g.delta_margin), ("excitation", g.excitation_margin), ("floor", g.floor_margin)] {
            let slot = margins.entry(name).or_insert(f64::INFINITY);
            *slot = slot.min(val);
        }
    }
    for (name, val) in margins {
        checks.soft(&format!("gap_margin_{name}"), val >= -tol.energy, val, "min over P");
    }
    if let Some(p) = ps.get(ps.len() / 2) {
        // least-squares line through tiny couplings, where the quadratic
        // part of the interaction is negligible
        let at = |x: f64| -> Result<f64> { Ok(FiberModel::new(&cfg.params.with_coupling(x))?.interaction_norm(p)?) };
        let es: Vec<f64> = (1..=4).map(|i| i as f64 * 1e-6).collect();
        let vs: Vec<f64> = es.iter().map(|&x| at(x)).collect::<Result<_>>()?;
        let (slope, intercept) = line_fit(&es, &vs);
        checks.soft("interaction_norm_intercept", intercept.abs() <= 1e-10, intercept, format!("slope {slope:.6e}, value at e = 0 {:.1e}", at(0.0)?));
    }

    let passed = checks.0.iter().all(|c| !c.hard || c.passed);
    let report = VerifyReport { passed, symmetry_breaking_injected: cfg.verify.inject_symmetry_breaking, checks: checks.0 };
    let path = ctx.out("verify.json")?;
    write_json(&path, &report)?;
    ctx.cache.flush()?;
    let failures = report
        .checks
        .iter()
        .filter(|c| c.hard && !c.passed)
        .map(|c| format!("{}: {:.3e} {}", c.name, c.value, c.detail))
        .collect();
    Ok(Outcome { failures, files: vec![path] })
}

/// Runs the config's task list in a fixed order.
pub fn run_tasks(ctx: &Context) -> Result<Outcome> {
    let mut tasks = ctx.cfg.tasks.clone();
    tasks.sort();
    tasks.dedup();
    let mut out = Outcome::default();
    for t in tasks {
        out.merge(match t {
            Task::Spectrum => run_spectrum(ctx)?,
            Task::Bounds => run_bounds(ctx)?,
            Task::Kramers => run_kramers(ctx)?,
            Task::Verify => run_verify(ctx)?,
            Task::Convergence => run_convergence(ctx)?,
        });
    }
    Ok(out)
}

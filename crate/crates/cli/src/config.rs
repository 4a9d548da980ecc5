//! Run configuration, read from TOML. Every field has a default, so an
//! empty file is a valid config; `srpf print-config` dumps the full tree.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use srpf_core::spectral::SpectralOptions;
use srpf_core::{GridSpec, ModelParams, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Momenta {
    /// Explicit list of total momenta.
    List { points: Vec<[f64; 3]> },
    /// `|P| = i·p_max/(points−1)` along `u = (1, 0, 0)`, `i = 0..points`.
    Radial { p_max: f64, points: usize },
}

impl Default for Momenta {
    fn default() -> Self {
        Momenta::Radial { p_max: 2.0, points: 11 }
    }
}

impl Momenta {
    pub fn to_vectors(&self) -> Vec<Vec3> {
        match self {
            Momenta::List { points } => points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect(),
            Momenta::Radial { p_max, points } => {
                // multiply a fixed step so ladders with the same spacing share
                // bit-identical points
                let step = if *points > 1 { p_max / (*points - 1) as f64 } else { 0.0 };
                (0..*points).map(|i| Vec3::new(i as f64 * step, 0.0, 0.0)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Spectrum,
    Bounds,
    Kramers,
    Verify,
    Convergence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative slack on `A ≤ B` checks.
    pub sandwich: f64,
    /// Absolute slack on energy envelopes and `E(P) = E(−P)`.
    pub energy: f64,
    /// `‖θH − Hθ‖_F` ceiling.
    pub theta: f64,
    /// Relative `‖D² − (T+M²)⊕(T+M²)‖_F` ceiling.
    pub dirac_square: f64,
    /// Relative direct-vs-expanded `T(P)` ceiling.
    pub t_forms: f64,
    /// Entrywise quadrature-vs-eigen square-root ceiling.
    pub sqrt_quad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sandwich: 1e-9,
            energy: 1e-9,
            theta: 1e-12,
            dirac_square: 1e-10,
            t_forms: 1e-12,
            sqrt_quad: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    /// Random vectors per creation/annihilation bound.
    pub field_samples: usize,
    pub monotone_trials: usize,
    pub monotone_dim: usize,
    /// Adds a small `σ₃ ⊗ 1` term to `H(P)` before the symmetry checks.
    /// Negative control: the run must fail.
    pub inject_symmetry_breaking: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            field_samples: 1000,
            monotone_trials: 1000,
            monotone_dim: 12,
            inject_symmetry_breaking: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub n_max: usize,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceOptions {
    /// Momentum at which the ladder is evaluated.
    pub p: [f64; 3],
    pub rungs: Vec<Rung>,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        let grid = |shells, directions| GridSpec { shells, directions, ..GridSpec::default() };
        use srpf_core::DirectionSet::{Axis, Octahedron};
        ConvergenceOptions {
            p: [0.5, 0.0, 0.0],
            rungs: vec![
                Rung { n_max: 1, grid: grid(1, Axis) },
                Rung { n_max: 2, grid: grid(1, Axis) },
                Rung { n_max: 3, grid: grid(1, Axis) },
                Rung { n_max: 1, grid: grid(1, Octahedron) },
                Rung { n_max: 1, grid: grid(2, Octahedron) },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ModelParams,
    pub momenta: Momenta,
    /// Tasks run by `srpf run-all`-style invocations; subcommands pick one.
    pub tasks: Vec<Task>,
    /// Extra wavevectors added to `{0} ∪ {mode k}` when minimizing `Δ(P)`.
    pub trial_extra: Vec<[f64; 3]>,
    pub spectral: SpectralOptions,
    pub tolerances: Tolerances,
    pub verify: VerifyOptions,
    pub convergence: ConvergenceOptions,
    pub out_dir: PathBuf,
    pub cache_path: Option<PathBuf>,
    /// Seed for the randomized property suites.
    pub seed: u64,
    /// Worker threads; absent means one per core.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: ModelParams::default(),
            momenta: Momenta::default(),
            tasks: vec![Task::Spectrum, Task::Bounds, Task::Kramers, Task::Verify],
            trial_extra: Vec::new(),
            spectral: SpectralOptions::default(),
            tolerances: Tolerances::default(),
            verify: VerifyOptions::default(),
            convergence: ConvergenceOptions::default(),
            out_dir: PathBuf::from("out"),
            cache_path: None,
            seed: 20240917,
            threads: None,
        }
    }
}

/// Config could not be read or is invalid. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        // toml's error display carries line and column
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| ConfigError(e.to_string()))?;
        if let Momenta::Radial { p_max, .. } = self.momenta {
            if !(p_max.is_finite() && p_max >= 0.0) {
                return Err(ConfigError("momenta.p_max must be finite and >= 0".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(ConfigError("threads must be >= 1".into()));
        }
        if self.verify.monotone_dim == 0 || self.verify.monotone_dim > 32 {
            return Err(ConfigError("verify.monotone_dim must lie in 1..=32".into()));
        }
        Ok(())
    }

    pub fn momenta(&self) -> Vec<Vec3> {
        self.momenta.to_vectors()
    }

    pub fn trial_extra(&self) -> Vec<Vec3> {
        self.trial_extra.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(RunConfig::from_toml("").unwrap(), cfg);
    }

    #[test]
    fn partial_params_keep_defaults() {
        let cfg = RunConfig::from_toml("[params]\ne = 0.1\n[params.grid]\nshells = 1\n").unwrap();
        assert_eq!(cfg.params.e, 0.1);
        assert_eq!(cfg.params.gamma, 0.5);
        assert_eq!(cfg.params.grid.shells, 1);
        assert_eq!(cfg.params.grid.directions, srpf_core::DirectionSet::Octahedron);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::from_toml("seed = 1\n\n[params]\ngamma = \"half\"\n").unwrap_err();
        assert!(err.0.contains("line 4"), "{err}");
        let err = RunConfig::from_toml("[params]\ngamma = 1.5\n").unwrap_err();
        assert!(err.0.contains("gamma"), "{err}");
    }

    #[test]
    fn radial_ladder_runs_along_x() {
        let m = Momenta::Radial { p_max: 2.0, points: 11 }.to_vectors();
        assert_eq!(m.len(), 11);
        assert_eq!(m[10], Vec3::new(2.0, 0.0, 0.0));
        assert!(m.iter().all(|p| p[1] == 0.0 && p[2] == 0.0));
        let wide = Momenta::Radial { p_max: 4.0, points: 21 }.to_vectors();
        assert_eq!(&wide[..11], &m[..]);
        assert_eq!(Momenta::Radial { p_max: 1.0, points: 1 }.to_vectors(), vec![Vec3::zeros()]);
    }

    #[test]
    fn momentum_list_parses() {
        let cfg = RunConfig::from_toml("[momenta]\nkind = \"list\"\npoints = [[0.1, 0.2, 0.3]]\n").unwrap();
        assert_eq!(cfg.momenta(), vec![Vec3::new(0.1, 0.2, 0.3)]);
        let cfg = RunConfig::from_toml("[momenta]\nkind = \"list\"\npoints = []\n").unwrap();
        assert!(cfg.momenta().is_empty());
    }
}

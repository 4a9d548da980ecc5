//! Physical and truncation parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Direction set used for the angular part of the mode grid.
///
/// Every set is closed under `d -> -d` and carries equal solid-angle weights
/// `4π / len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionSet {
    /// ±z (2 directions).
    Axis,
    /// ±x, ±y, ±z (6 directions).
    Octahedron,
    /// The 8 corners (±1, ±1, ±1)/√3.
    Cube,
    /// The 12 icosahedron vertices.
    Icosahedron,
    /// User-supplied half set; the antipodes are added automatically.
    Custom(Vec<[f64; 3]>),
}

/// Optional multiplier on the form factors. The default sharp cutoff is
/// realised by grid membership alone.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Envelope {
    #[default]
    Sharp,
    /// Logistic roll-off `1 / (1 + exp((|k| − Λ + 4w) / w))`.
    Smooth { width: f64 },
}

impl Envelope {
    pub fn factor(&self, k_abs: f64, cutoff: f64) -> f64 {
        match *self {
            Envelope::Sharp => 1.0,
            Envelope::Smooth { width } => 1.0 / (1.0 + ((k_abs - cutoff + 4.0 * width) / width).exp()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    /// Number of Gauss–Legendre radial shells on `[radial_floor, Λ]`.
    pub shells: usize,
    pub directions: DirectionSet,
    /// Lower end of the radial interval, keeps `k = 0` off the grid.
    pub radial_floor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            shells: 2,
            directions: DirectionSet::Octahedron,
            radial_floor: 1e-3,
        }
    }
}

/// Model parameters: coupling `e`, kinetic prefactor `γ`, charge mass `M`,
/// photon mass `m_ph`, ultraviolet cutoff `Λ`, the mode grid and the total
/// photon-number cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub e: f64,
    pub gamma: f64,
    pub mass: f64,
    pub photon_mass: f64,
    pub cutoff: f64,
    pub grid: GridSpec,
    pub n_max: usize,
    pub envelope: Envelope,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            e: 0.05,
            gamma: 0.5,
            mass: 1.0,
            photon_mass: 0.5,
            cutoff: 1.0,
            grid: GridSpec::default(),
            n_max: 1,
            envelope: Envelope::Sharp,
        }
    }
}

impl ModelParams {
    /// Four modes (±z, two polarizations) with up to two photons.
    pub fn small() -> Self {
        ModelParams {
            grid: GridSpec {
                shells: 1,
                directions: DirectionSet::Axis,
                radial_floor: 1e-3,
            },
            n_max: 2,
            ..ModelParams::default()
        }
    }

    pub fn with_coupling(&self, e: f64) -> Self {
        ModelParams { e, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.e.is_finite() && self.e >= 0.0) {
            return bad("coupling e must be finite and >= 0");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return bad("mass M must be finite and > 0");
        }
        if !(self.photon_mass.is_finite() && self.photon_mass >= 0.0) {
            return bad("photon mass must be finite and >= 0");
        }
        if !(self.cutoff.is_finite() && self.cutoff > 0.0) {
            return bad("cutoff Lambda must be finite and > 0");
        }
        if !(self.grid.radial_floor > 0.0 && self.grid.radial_floor < self.cutoff) {
            return bad("radial_floor must lie in (0, Lambda)");
        }
        if let Envelope::Smooth { width } = self.envelope {
            if !(width > 0.0) {
                return bad("smooth envelope width must be > 0");
            }
        }
        Ok(())
    }

    /// `0 < γ < 1` and `m_ph > 0`: the regime where the uniform gap and the
    /// exact two-fold degeneracy are expected. Flagged, never enforced.
    pub fn gap_hypotheses_met(&self) -> bool {
        self.gamma < 1.0 && self.photon_mass > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ModelParams::default().validate().unwrap();
        ModelParams::small().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let p = ModelParams { gamma: 1.5, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ModelParams { mass: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ModelParams { e: -0.1, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ModelParams { cutoff: f64::INFINITY, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn hypotheses_flag() {
        assert!(ModelParams::default().gap_hypotheses_met());
        let p = ModelParams { gamma: 1.0, ..Default::default() };
        assert!(!p.gap_hypotheses_met());
        let p = ModelParams { photon_mass: 0.0, ..Default::default() };
        assert!(!p.gap_hypotheses_met());
    }
}

//! Run configuration shared by the command line and the acceptance suite.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::lp::{WindowConfig, DEFAULT_P_GRID, WINDOW_LEVELS, WINDOW_SEEDS};
use crate::multiplier::Multiplier;
use crate::numerics::BumpFunction;
use crate::pipeline::GridParams;
use crate::potentials::PotentialSpec;
use crate::spectral::SpectralOptions;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Jost,
    Transform,
    Kernel,
    Sqfn,
    Apscan,
    Window,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Full,
    /// Criteria that only need `V = 0`.
    FreeOnly,
}

/// Everything that determines the output of a run. It is validated before
/// any computation and written verbatim into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub potential: PotentialSpec,
    pub grid: GridParams,
    pub spectral: SpectralOptions,
    pub multiplier: Multiplier,
    /// Exponents for square-function, `A_p` and window experiments.
    pub ps: Vec<f64>,
    /// `r_max` of the window experiment's refinement levels.
    pub levels: Vec<f64>,
    /// Number of random sign patterns.
    pub seeds: usize,
    pub suite: Suite,
    pub out: String,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Verify,
            potential: PotentialSpec::Aubin {
                a: 1.0,
                strength: 1.0,
            },
            grid: GridParams::REFERENCE,
            spectral: SpectralOptions::default(),
            multiplier: Multiplier::HighPass {
                bump: BumpFunction::default(),
            },
            ps: DEFAULT_P_GRID.to_vec(),
            levels: WINDOW_LEVELS.to_vec(),
            seeds: WINDOW_SEEDS,
            suite: Suite::Full,
            out: "out".into(),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        match &self.potential {
            PotentialSpec::Aubin { a, strength } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::arg("a", format!("Aubin scale must be positive, got {a}")));
                }
                if !strength.is_finite() {
                    return Err(Error::arg("strength", format!("must be finite, got {strength}")));
                }
            }
            PotentialSpec::Table { path } => {
                if !Path::new(path).is_file() {
                    return Err(Error::arg("potential", format!("no table at {path}")));
                }
            }
            PotentialSpec::Free => {}
        }
        if !(self.spectral.k_eps > 0.0 && self.spectral.resonance_eps > 0.0) {
            return Err(Error::arg("spectral", "k_eps and resonance_eps must be positive"));
        }
        if self.ps.is_empty() {
            return Err(Error::arg("ps", "need at least one exponent"));
        }
        if let Some(p) = self.ps.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return Err(Error::arg("ps", format!("need 1 < p < ∞, got {p}")));
        }
        if self.levels.len() < 2 || self.levels.windows(2).any(|w| !(w[0] > 0.0 && w[1] > w[0])) {
            return Err(Error::arg("levels", "need at least two increasing positive r_max values"));
        }
        if self.seeds == 0 {
            return Err(Error::arg("seeds", "need at least one sign pattern"));
        }
        if self.out.is_empty() {
            return Err(Error::arg("out", "empty output directory"));
        }
        Ok(())
    }

    /// Window experiment for `potential`, refined up to the configured grid.
    pub fn window_config(&self, potential: PotentialSpec) -> WindowConfig {
        let top = self.levels.last().copied().unwrap_or(self.grid.r_max);
        WindowConfig {
            potential,
            reference: self.grid.rescaled(top),
            levels: self.levels.clone(),
            ps: self.ps.clone(),
            seeds: self.seeds,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_partial_files() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        let partial: RunConfig = serde_json::from_str(r#"{"seed": 9, "grid": {"r_max": 50, "n": 1024, "j_min": -4, "j_max": 3}}"#).unwrap();
        assert_eq!(partial.seed, 9);
        assert_eq!(partial.grid.n, 1024);
        assert_eq!(partial.potential, c.potential);
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 9}"#).is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.ps = vec![1.0];
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.levels = vec![100.0, 50.0];
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.potential = PotentialSpec::Aubin { a: -1.0, strength: 1.0 };
        assert!(c.validate().is_err());
    }
}

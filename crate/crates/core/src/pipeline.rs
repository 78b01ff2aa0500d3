//! Everything needed to apply spectral multipliers for one potential on one
//! pair of grids.

use serde::{Deserialize, Serialize};

use crate::jost::{find_bound_states, BoundStateSet, JostSolver, ScatteringData};
use crate::multiplier::{apply_multiplier_batch, Multiplier};
use crate::numerics::{
    build_radial_grid, build_spectral_grid, DyadicPartition, Grading, RadialGrid, SpectralGrid,
};
use crate::potentials::{PotentialModel, PotentialSpec};
use crate::spectral::{build_eigenbasis, Eigenbasis, SpectralOptions};
use crate::{Error, Result};

/// Radial and spectral discretization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub r_max: f64,
    pub n: usize,
    pub j_min: i32,
    pub j_max: i32,
}

impl GridParams {
    /// `r_max = 200`, `n = 8192`, `j ∈ [−6, 4]`.
    pub const REFERENCE: GridParams = GridParams {
        r_max: 200.0,
        n: 8192,
        j_min: -6,
        j_max: 4,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(Error::arg("r_max", format!("must be positive, got {}", self.r_max)));
        }
        if self.n < 8 {
            return Err(Error::arg("n", format!("need at least 8 intervals, got {}", self.n)));
        }
        if self.j_min > self.j_max {
            return Err(Error::arg(
                "j_min",
                format!("j_min = {} exceeds j_max = {}", self.j_min, self.j_max),
            ));
        }
        Ok(())
    }

    /// Same mesh and same spectral window on `[0, r_max]`: `n` scales with
    /// `r_max`.
    pub fn rescaled(&self, r_max: f64) -> GridParams {
        let n = ((self.n as f64) * r_max / self.r_max).round().max(8.0) as usize;
        GridParams { r_max, n, ..*self }
    }

    pub fn partition(&self) -> DyadicPartition {
        DyadicPartition::new(self.j_min, self.j_max)
    }
}

impl Default for GridParams {
    fn default() -> Self {
        Self::REFERENCE
    }
}

pub struct Pipeline {
    pub params: GridParams,
    pub potential: PotentialModel,
    pub grid: RadialGrid,
    pub spectral: SpectralGrid,
    pub solver: JostSolver,
    pub basis: Eigenbasis,
    pub scattering: ScatteringData,
    pub bound: BoundStateSet,
}

impl Pipeline {
    pub fn build(spec: &PotentialSpec, params: GridParams, opts: SpectralOptions) -> Result<Self> {
        Self::from_model(spec.build()?, params, opts)
    }

    pub fn from_model(
        potential: PotentialModel,
        params: GridParams,
        opts: SpectralOptions,
    ) -> Result<Self> {
        params.validate()?;
        let grid = build_radial_grid(params.r_max, params.n, Grading::Uniform)?;
        let spectral = build_spectral_grid(params.j_min, params.j_max, params.r_max)?;
        let solver = JostSolver::new(&potential, &grid, opts.interpolation);
        let (basis, scattering) = build_eigenbasis(&solver, &grid, &spectral, opts)?;
        let bound = find_bound_states(&potential, &grid)?;
        Ok(Self {
            params,
            potential,
            grid,
            spectral,
            solver,
            basis,
            scattering,
            bound,
        })
    }

    pub fn partition(&self) -> DyadicPartition {
        self.params.partition()
    }

    pub fn apply(&self, mu: &Multiplier, fs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        apply_multiplier_batch(&self.basis, &self.bound, &self.grid, mu, fs)
    }
}

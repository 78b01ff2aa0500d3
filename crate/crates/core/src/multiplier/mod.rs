//! Spectral multipliers `M̃_μ = F̃⁻¹ μ F̃`, their kernels, the four-piece
//! kernel decomposition and numerical checks of the kernel bounds.

mod bounds;
mod kernel;

use num_dual::{Dual3_64, DualNum};
use serde::{Deserialize, Serialize};

pub use bounds::{
    hormander_scan, verify_high_energy_bounds, verify_low_energy_bounds, HighEnergyReport,
    HormanderReport, LowEnergyReport, BLOCK_GROWTH_TOL,
};
pub use kernel::{
    assemble_kernel, build_kernel_tables, decompose_kernel, dr_block_kernel, dr_k2, k2_rows,
    kernel_matvec, KernelDecomposition, KernelTables, MAX_KERNEL_ENTRIES,
};

use crate::jost::BoundStateSet;
use crate::numerics::{BumpFunction, DyadicPartition, RadialGrid};
use crate::spectral::{project_continuous, Eigenbasis};
use crate::{Error, Result};

/// Where a multiplier is allowed to be non-zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Support {
    /// `μ = 0` on `0 < k < 1`.
    High,
    /// `μ = 0` on `k > 1`.
    Low,
    Full,
}

/// Real multipliers with closed-form derivatives up to third order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Multiplier {
    Constant {
        value: f64,
    },
    /// `ψ(2^{−j}k)`.
    Dyadic {
        j: i32,
        #[serde(default)]
        bump: BumpFunction,
    },
    /// Block `j` of a finite partition, with cumulative end blocks.
    Block {
        partition: DyadicPartition,
        j: i32,
    },
    /// `1 − χ(k)`, vanishing on `k ≤ 1`.
    HighPass {
        #[serde(default)]
        bump: BumpFunction,
    },
    /// `χ(2k)`, vanishing on `k ≥ 1`.
    LowPass {
        #[serde(default)]
        bump: BumpFunction,
    },
    /// `sin(log k)`.
    SinLog,
    /// `Σ_j ε_j·block_j(k)` with `ε_j = ±1`.
    RandomSign {
        partition: DyadicPartition,
        signs: Vec<f64>,
    },
    Product {
        factors: Vec<Multiplier>,
    },
}

fn leibniz(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0],
        a[1] * b[0] + a[0] * b[1],
        a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
        a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
    ]
}

fn scale_jet(j: [f64; 4], c: f64) -> [f64; 4] {
    [j[0], c * j[1], c * c * j[2], c * c * c * j[3]]
}

impl Multiplier {
    pub fn one() -> Self {
        Multiplier::Constant { value: 1.0 }
    }

    /// Random-sign Littlewood-Paley multiplier, one sign per block.
    pub fn random_sign(partition: DyadicPartition, rng: &mut impl rand::RngExt) -> Self {
        let signs = partition
            .blocks()
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        Multiplier::RandomSign { partition, signs }
    }

    pub fn product(self, other: Multiplier) -> Self {
        Multiplier::Product {
            factors: vec![self, other],
        }
    }

    /// `[μ, μ′, μ″, μ‴]` at `k > 0`.
    pub fn jet(&self, k: f64) -> [f64; 4] {
        match self {
            Multiplier::Constant { value } => [*value, 0.0, 0.0, 0.0],
            Multiplier::Dyadic { j, bump } => {
                let c = 2f64.powi(-j);
                scale_jet(bump.psi_jet(c * k), c)
            }
            Multiplier::Block { partition, j } => partition.block_jet(*j, k),
            Multiplier::HighPass { bump } => {
                let t = bump.chi_jet(k);
                [1.0 - t[0], -t[1], -t[2], -t[3]]
            }
            Multiplier::LowPass { bump } => scale_jet(bump.chi_jet(2.0 * k), 2.0),
            Multiplier::SinLog => {
                let d = Dual3_64::from_re(k).derivative().ln().sin();
                [d.re, d.v1, d.v2, d.v3]
            }
            Multiplier::RandomSign { partition, signs } => {
                let mut out = [0.0; 4];
                for (j, s) in partition.blocks().zip(signs) {
                    let b = partition.block_jet(j, k);
                    for (o, x) in out.iter_mut().zip(b) {
                        *o += s * x;
                    }
                }
                out
            }
            Multiplier::Product { factors } => factors
                .iter()
                .fold([1.0, 0.0, 0.0, 0.0], |acc, f| leibniz(acc, f.jet(k))),
        }
    }

    pub fn value(&self, k: f64) -> f64 {
        match self {
            Multiplier::Constant { value } => *value,
            Multiplier::Block { partition, j } => partition.block(*j, k),
            _ => self.jet(k)[0],
        }
    }

    pub fn values(&self, ks: &[f64]) -> Vec<f64> {
        ks.iter().map(|&k| self.value(k)).collect()
    }

    /// Declared support, derived from the construction.
    pub fn support(&self) -> Support {
        let from_interval = |lo: f64, hi: f64| {
            if lo >= 1.0 {
                Support::High
            } else if hi <= 1.0 {
                Support::Low
            } else {
                Support::Full
            }
        };
        match self {
            Multiplier::Constant { value } if *value == 0.0 => Support::Low,
            Multiplier::Constant { .. } | Multiplier::SinLog => Support::Full,
            Multiplier::Dyadic { j, .. } => {
                from_interval(2f64.powi(j - 1), 2f64.powi(j + 1))
            }
            Multiplier::Block { partition, j } => {
                let lo = if *j == partition.j_min {
                    0.0
                } else {
                    2f64.powi(j - 1)
                };
                let hi = if *j == partition.j_max {
                    f64::INFINITY
                } else {
                    2f64.powi(j + 1)
                };
                from_interval(lo, hi)
            }
            Multiplier::HighPass { .. } => Support::High,
            Multiplier::LowPass { .. } => Support::Low,
            Multiplier::RandomSign { .. } => Support::Full,
            Multiplier::Product { factors } => {
                let s: Vec<Support> = factors.iter().map(Multiplier::support).collect();
                if s.contains(&Support::High) {
                    Support::High
                } else if s.contains(&Support::Low) {
                    Support::Low
                } else {
                    Support::Full
                }
            }
        }
    }

    /// Checks the declared support on the sampled `k`.
    pub fn verify_support(&self, ks: &[f64]) -> bool {
        let outside = |k: f64| match self.support() {
            Support::High => k < 1.0,
            Support::Low => k > 1.0,
            Support::Full => false,
        };
        ks.iter()
            .filter(|&&k| outside(k))
            .all(|&k| self.value(k) == 0.0)
    }
}

/// `sup_k k^ℓ |μ^{(ℓ)}(k)|` for `ℓ = 0..3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MikhlinReport {
    pub constants: [f64; 4],
    pub bound: f64,
    pub pass: bool,
}

pub fn check_mikhlin(mu: &Multiplier, ks: &[f64], bound: f64) -> MikhlinReport {
    let mut constants = [0.0_f64; 4];
    for &k in ks.iter().filter(|&&k| k > 0.0) {
        let j = mu.jet(k);
        let mut kp = 1.0;
        for (c, d) in constants.iter_mut().zip(j) {
            *c = c.max(kp * d.abs());
            kp *= k;
        }
    }
    MikhlinReport {
        constants,
        bound,
        pass: constants.iter().all(|c| c.is_finite() && *c <= bound),
    }
}

/// `F̃⁻¹ μ F̃ P_c f̃`.
pub fn apply_multiplier(
    basis: &Eigenbasis,
    bound: &BoundStateSet,
    grid: &RadialGrid,
    mu: &Multiplier,
    f: &[f64],
) -> Result<Vec<f64>> {
    if f.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a radial grid of {} nodes",
            f.len(),
            grid.len()
        )));
    }
    let fc = project_continuous(bound, grid, f);
    let mut g = basis.forward_reduced(&fc)?;
    for (x, k) in g.iter_mut().zip(basis.k()) {
        *x *= mu.value(*k);
    }
    basis.inverse_reduced(&g)
}

/// Applies `μ` to many inputs at once; columns of the result match `fs`.
pub fn apply_multiplier_batch(
    basis: &Eigenbasis,
    bound: &BoundStateSet,
    grid: &RadialGrid,
    mu: &Multiplier,
    fs: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let nr = grid.len();
    let mut a = ndarray::Array2::<f64>::zeros((nr, fs.len()));
    for (c, f) in fs.iter().enumerate() {
        if f.len() != nr {
            return Err(Error::GridMismatch(format!(
                "{} samples for a radial grid of {nr} nodes",
                f.len()
            )));
        }
        let fc = project_continuous(bound, grid, f);
        a.column_mut(c).assign(&ndarray::ArrayView1::from(&fc));
    }
    let mut g = basis.forward_batch(a.view());
    for (mut row, k) in g.axis_iter_mut(ndarray::Axis(0)).zip(basis.k()) {
        row *= mu.value(*k);
    }
    let out = basis.inverse_batch(g.view());
    Ok(out.columns().into_iter().map(|c| c.to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_jet_matches_closed_form() {
        // μ(k) = sin(log k)², differentiated by hand
        let mu = Multiplier::SinLog.product(Multiplier::SinLog);
        let k = 1.7_f64;
        let (s, c) = (k.ln().sin(), k.ln().cos());
        let d1 = 2.0 * s * c / k;
        let d2 = (2.0 * (c * c - s * s) - 2.0 * s * c) / (k * k);
        let j = mu.jet(k);
        assert!((j[0] - s * s).abs() < 1e-14);
        assert!((j[1] - d1).abs() < 1e-14);
        assert!((j[2] - d2).abs() < 1e-13);
    }

    #[test]
    fn supports() {
        let b = BumpFunction::default();
        assert_eq!(Multiplier::HighPass { bump: b }.support(), Support::High);
        assert_eq!(Multiplier::LowPass { bump: b }.support(), Support::Low);
        assert_eq!(Multiplier::Dyadic { j: -2, bump: b }.support(), Support::Low);
        assert_eq!(Multiplier::Dyadic { j: 1, bump: b }.support(), Support::High);
        let ks: Vec<f64> = (1..400).map(|i| i as f64 * 0.01).collect();
        assert!(Multiplier::LowPass { bump: b }.verify_support(&ks));
        assert!(Multiplier::HighPass { bump: b }.verify_support(&ks));
    }
}

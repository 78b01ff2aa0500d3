use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Interpolation, JostSolver};
use crate::numerics::RadialGrid;
use crate::potentials::PotentialModel;

/// Default threshold on `|f(0,0)|` below which a potential is resonant.
pub const RESONANCE_EPS: f64 = 1e-3;

/// Jost data at `r = 0` on a list of wavenumbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringData {
    pub k: Vec<f64>,
    pub f0: Vec<C>,
    pub f0p: Vec<C>,
    /// Determinant of the `c±` system evaluated from its defining integrals.
    pub det: Vec<C>,
    /// `Im(f(0,k)·conj f′(0,k)) + k`.
    pub wronskian_defect: Vec<f64>,
    pub f0_at_zero: f64,
    pub f0p_at_zero: f64,
    /// `∂ₖf(0,0)`, purely imaginary.
    pub dk_f0_at_0: C,
    pub resonance_magnitude: f64,
}

impl ScatteringData {
    pub fn max_wronskian_defect(&self) -> f64 {
        self.wronskian_defect
            .iter()
            .fold(0.0_f64, |a, d| a.max(d.abs()))
    }

    /// Largest `|D(k) + 2ik f(0,k)| / |2k f(0,k)|`.
    pub fn max_determinant_defect(&self) -> f64 {
        self.k
            .iter()
            .zip(self.f0.iter().zip(&self.det))
            .filter(|(k, _)| **k > 0.0)
            .map(|(&k, (f0, d))| {
                let rhs = C::new(0.0, -2.0 * k) * f0;
                (d - rhs).norm() / rhs.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Fitted `c` in `|f(0,k)| ≥ c·k/(1+k)` and `C` in `|f(0,k)| ≤ C`.
    pub fn f0_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for (&k, f) in self.k.iter().zip(&self.f0) {
            if k > 0.0 {
                lo = lo.min(f.norm() * (1.0 + k) / k);
            }
            hi = hi.max(f.norm());
        }
        (lo, hi)
    }
}

pub fn scattering_at_origin(
    p: &PotentialModel,
    grid: &RadialGrid,
    ks: &[f64],
    interpolation: Interpolation,
) -> ScatteringData {
    let solver = JostSolver::new(p, grid, interpolation);
    scattering_from_solver(&solver, ks)
}

pub(crate) fn scattering_from_solver(solver: &JostSolver, ks: &[f64]) -> ScatteringData {
    let rows: Vec<(C, C, C)> = ks
        .par_iter()
        .map(|&k| solver.origin_data(&solver.solve_m(k)))
        .collect();
    let zero = solver.solve_m(0.0);
    let dk = solver.solve_dm_dk(&zero);
    let mut out = ScatteringData {
        k: ks.to_vec(),
        f0: Vec::with_capacity(ks.len()),
        f0p: Vec::with_capacity(ks.len()),
        det: Vec::with_capacity(ks.len()),
        wronskian_defect: Vec::with_capacity(ks.len()),
        f0_at_zero: zero.m[0].re,
        f0p_at_zero: zero.dm_dr[0].re,
        dk_f0_at_0: dk.dm_dk[0],
        resonance_magnitude: zero.m[0].norm(),
    };
    for (&k, (f0, f0p, det)) in ks.iter().zip(rows) {
        out.f0.push(f0);
        out.f0p.push(f0p);
        out.det.push(det);
        out.wronskian_defect.push((f0 * f0p.conj()).im + k);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceReport {
    pub resonant: bool,
    pub magnitude: f64,
    pub epsilon: f64,
}

/// Compares `|f(0,0)|` against `epsilon`.
pub fn detect_resonance(p: &PotentialModel, grid: &RadialGrid, epsilon: f64) -> ResonanceReport {
    let solver = JostSolver::new(p, grid, Interpolation::default());
    let magnitude = solver.solve_m(0.0).m[0].norm();
    ResonanceReport {
        resonant: magnitude < epsilon,
        magnitude,
        epsilon,
    }
}

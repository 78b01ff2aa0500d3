//! Generalized eigenfunctions `ẽ(r,k)` and the distorted Fourier transform.
//!
//! For every `k` the eigenfunction has a constant phase: `ω(k)·ẽ(r,k)` is
//! real. The basis is therefore stored as the real table
//! `R(k, r) = ω(k)·ẽ(r,k)` together with `ω`, which halves the memory and
//! keeps real multipliers real.

use std::f64::consts::{FRAC_2_PI, FRAC_PI_4, PI};

use ndarray::{Array2, ArrayView2, Axis};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::jost::{BoundStateSet, Interpolation, JostSolver, ScatteringData, RESONANCE_EPS};
use crate::numerics::{RadialGrid, SpectralGrid};
use crate::{Error, Result};

/// Relative size of `f̃(r_max)` above which inputs count as truncated.
pub const TRUNCATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralOptions {
    pub interpolation: Interpolation,
    /// Below this `k` a resonant potential uses the limit `c₊(0)`.
    pub k_eps: f64,
    pub resonance_eps: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            interpolation: Interpolation::default(),
            k_eps: 1e-3,
            resonance_eps: RESONANCE_EPS,
        }
    }
}

/// `c₋ = −1/(2i)`.
pub fn c_minus() -> C {
    C::new(0.0, 0.5)
}

/// `(c₊(k), c₋(k))` from `f(0,k)`; for a resonant potential and `k < k_eps`
/// the limit `c₊(0) = (1/2i)·conj(∂ₖf(0,0))/∂ₖf(0,0)` is used instead.
pub fn scattering_coeffs(
    f0: C,
    k: f64,
    dk_f0_at_0: C,
    resonant: bool,
    k_eps: f64,
) -> Result<(C, C)> {
    let half_over_i = C::new(0.0, -0.5);
    if resonant && k < k_eps {
        if dk_f0_at_0.norm() == 0.0 {
            return Err(Error::Inconsistent(
                "resonant potential with vanishing ∂ₖf(0,0)".into(),
            ));
        }
        let u = dk_f0_at_0 / dk_f0_at_0.norm();
        return Ok((half_over_i * u.conj() / u, c_minus()));
    }
    let mag = f0.norm();
    if mag == 0.0 || !mag.is_finite() {
        return Err(Error::Inconsistent(format!("f(0,k) = {f0} at k = {k}")));
    }
    let u = f0 / mag;
    Ok((half_over_i * u.conj() / u, c_minus()))
}

/// Unit phase `ω` with `ω·(c₊ f + c₋ conj f)` real for every real-`r` Jost
/// function `f`: writing `2c₊ = e^{iα}`, `ω = e^{−iα/2 − iπ/4}`.
pub fn realizing_phase(c_plus: C) -> C {
    let alpha = c_plus.arg();
    C::from_polar(1.0, -0.5 * alpha - FRAC_PI_4)
}

/// Distorted-transform values on the spectral grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralCoefficients {
    pub k: Vec<f64>,
    pub values: Vec<C>,
    pub bound_components: Vec<f64>,
}

/// Generalized eigenfunctions on a radial × spectral grid.
#[derive(Debug, Clone)]
pub struct Eigenbasis {
    r: Vec<f64>,
    r_weights: Vec<f64>,
    k: Vec<f64>,
    k_weights: Vec<f64>,
    omega: Vec<C>,
    c_plus: Vec<C>,
    /// `R[k, r] = ω(k)·ẽ(r,k)`.
    table: Array2<f64>,
    resonant: bool,
}

/// Sweeps every spectral node once and assembles the eigenbasis together
/// with the scattering data at the origin.
pub fn build_eigenbasis(
    solver: &JostSolver,
    radial: &RadialGrid,
    spectral: &SpectralGrid,
    opts: SpectralOptions,
) -> Result<(Eigenbasis, ScatteringData)> {
    let ks = spectral.nodes();
    let nr = radial.len();
    let zero = solver.solve_m(0.0);
    let dk_zero = solver.solve_dm_dk(&zero);
    let dk_f0 = dk_zero.dm_dk[0];
    let f00 = zero.m[0].re;
    let resonant = f00.abs() < opts.resonance_eps;
    let r = radial.nodes();

    let mut table = Array2::<f64>::zeros((ks.len(), nr));
    let per_k: Vec<Result<(C, C, C, C, C)>> = table
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .zip(ks.par_iter())
        .map(|(mut row, &k)| {
            let col = solver.solve_m(k);
            let (f0, f0p, det) = solver.origin_data(&col);
            let (cp, _) = scattering_coeffs(f0, k, dk_f0, resonant, opts.k_eps)?;
            let omega = realizing_phase(cp);
            let a = 2.0 * omega * cp;
            for (i, out) in row.iter_mut().enumerate() {
                *out = (a * C::from_polar(1.0, k * r[i]) * col.m[i]).re;
            }
            Ok((f0, f0p, det, cp, omega))
        })
        .collect();

    let mut scat = ScatteringData {
        k: ks.to_vec(),
        f0: Vec::with_capacity(ks.len()),
        f0p: Vec::with_capacity(ks.len()),
        det: Vec::with_capacity(ks.len()),
        wronskian_defect: Vec::with_capacity(ks.len()),
        f0_at_zero: f00,
        f0p_at_zero: zero.dm_dr[0].re,
        dk_f0_at_0: dk_f0,
        resonance_magnitude: f00.abs(),
    };
    let mut omega = Vec::with_capacity(ks.len());
    let mut c_plus = Vec::with_capacity(ks.len());
    for (&k, item) in ks.iter().zip(per_k) {
        let (f0, f0p, det, cp, om) = item?;
        scat.f0.push(f0);
        scat.f0p.push(f0p);
        scat.det.push(det);
        scat.wronskian_defect.push((f0 * f0p.conj()).im + k);
        c_plus.push(cp);
        omega.push(om);
    }
    let basis = Eigenbasis {
        r: r.to_vec(),
        r_weights: radial.origin_even_weights(),
        k: ks.to_vec(),
        k_weights: spectral.weights().to_vec(),
        omega,
        c_plus,
        table,
        resonant,
    };
    Ok((basis, scat))
}

impl Eigenbasis {
    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn k_weights(&self) -> &[f64] {
        &self.k_weights
    }

    pub fn r_weights(&self) -> &[f64] {
        &self.r_weights
    }

    pub fn omega(&self) -> &[C] {
        &self.omega
    }

    pub fn c_plus(&self) -> &[C] {
        &self.c_plus
    }

    pub fn is_resonant(&self) -> bool {
        self.resonant
    }

    /// Real table `R[k, r]`.
    pub fn table(&self) -> ArrayView2<'_, f64> {
        self.table.view()
    }

    /// `ẽ(r_i, k_j)`.
    pub fn etilde(&self, i: usize, j: usize) -> C {
        self.omega[j].conj() * self.table[[j, i]]
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.r.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a radial grid of {} nodes",
                f.len(),
                self.r.len()
            )));
        }
        Ok(())
    }

    fn warn_truncation(&self, f: &[f64]) {
        let peak = f.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let tail = f.last().map_or(0.0, |x| x.abs());
        if peak > 0.0 && tail > TRUNCATION_TOL * peak {
            log::warn!(
                "input not negligible at r_max: |f(r_max)| = {tail:.3e}, max |f| = {peak:.3e}"
            );
        }
    }

    /// Real coefficients `G(k) = √(2/π)∫ R(k,r) f(r) dr`; the transform is
    /// `ω(k)·G(k)`.
    pub fn forward_reduced(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        self.warn_truncation(f);
        let scale = FRAC_2_PI.sqrt();
        let wf: Vec<f64> = f.iter().zip(&self.r_weights).map(|(a, w)| a * w).collect();
        Ok(self
            .table
            .axis_iter(Axis(0))
            .into_par_iter()
            .map(|row| scale * row.iter().zip(&wf).map(|(a, b)| a * b).sum::<f64>())
            .collect())
    }

    /// `f(r) = √(2/π)∫ R(k,r) G(k) dk`.
    pub fn inverse_reduced(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.k.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a spectral grid of {} nodes",
                g.len(),
                self.k.len()
            )));
        }
        let scale = FRAC_2_PI.sqrt();
        let wg: Vec<f64> = g.iter().zip(&self.k_weights).map(|(a, w)| a * w).collect();
        let wg = ndarray::ArrayView1::from(&wg);
        Ok(self.table.t().dot(&wg).iter().map(|x| scale * x).collect())
    }

    /// Batch forward transform of the columns of `fs` (`nr × m`).
    pub fn forward_batch(&self, fs: ArrayView2<'_, f64>) -> Array2<f64> {
        let scale = FRAC_2_PI.sqrt();
        let mut wf = fs.to_owned();
        for (mut row, w) in wf.axis_iter_mut(Axis(0)).zip(&self.r_weights) {
            row *= *w;
        }
        let mut out = self.table.dot(&wf);
        out *= scale;
        out
    }

    /// Batch inverse transform of the columns of `gs` (`nk × m`).
    pub fn inverse_batch(&self, gs: ArrayView2<'_, f64>) -> Array2<f64> {
        let scale = FRAC_2_PI.sqrt();
        let mut wg = gs.to_owned();
        for (mut row, w) in wg.axis_iter_mut(Axis(0)).zip(&self.k_weights) {
            row *= *w;
        }
        let mut out = self.table.t().dot(&wg);
        out *= scale;
        out
    }

    /// `‖G‖²` on the spectral grid.
    pub fn spectral_energy(&self, g: &[f64]) -> f64 {
        g.iter().zip(&self.k_weights).map(|(x, w)| w * x * x).sum()
    }
}

/// `(F̃f̃)(k) = √(2/π)∫ conj(ẽ(r,k)) f̃(r) dr` plus bound-state components.
pub fn forward_transform(
    basis: &Eigenbasis,
    bound: &BoundStateSet,
    grid: &RadialGrid,
    f: &[f64],
) -> Result<SpectralCoefficients> {
    let g = basis.forward_reduced(f)?;
    Ok(SpectralCoefficients {
        k: basis.k.clone(),
        values: g.iter().zip(&basis.omega).map(|(x, w)| w * x).collect(),
        bound_components: bound.states.iter().map(|b| grid.inner(f, &b.psi)).collect(),
    })
}

/// `f̃(r) = √(2/π)∫ ẽ(r,k) F(k) dk`.
pub fn inverse_transform(basis: &Eigenbasis, coeffs: &SpectralCoefficients) -> Result<Vec<C>> {
    if coeffs.values.len() != basis.k.len() {
        return Err(Error::GridMismatch(format!(
            "{} coefficients for a spectral grid of {} nodes",
            coeffs.values.len(),
            basis.k.len()
        )));
    }
    let re: Vec<f64> = coeffs
        .values
        .iter()
        .zip(&basis.omega)
        .map(|(v, w)| (w.conj() * v).re)
        .collect();
    let im: Vec<f64> = coeffs
        .values
        .iter()
        .zip(&basis.omega)
        .map(|(v, w)| (w.conj() * v).im)
        .collect();
    let a = basis.inverse_reduced(&re)?;
    let b = basis.inverse_reduced(&im)?;
    Ok(a.into_iter().zip(b).map(|(x, y)| C::new(x, y)).collect())
}

/// `f̃ − Σ⟨f̃, φ_b⟩φ_b`.
pub fn project_continuous(bound: &BoundStateSet, grid: &RadialGrid, f: &[f64]) -> Vec<f64> {
    let mut out = f.to_vec();
    for b in &bound.states {
        let c = grid.inner(&out, &b.psi);
        for (x, p) in out.iter_mut().zip(&b.psi) {
            *x -= c * p;
        }
    }
    out
}

/// `f̃(r) = √(4π)·r·f(r)`.
pub fn lift_radial(r: &[f64], f: &[f64]) -> Vec<f64> {
    let c = (4.0 * PI).sqrt();
    r.iter().zip(f).map(|(x, v)| c * x * v).collect()
}

/// Inverse of [`lift_radial`]; at `r = 0` the value is extrapolated linearly
/// from the next two nodes.
pub fn lower_radial(r: &[f64], ft: &[f64]) -> Vec<f64> {
    let c = (4.0 * PI).sqrt();
    let mut out: Vec<f64> = r
        .iter()
        .zip(ft)
        .map(|(x, v)| if *x > 0.0 { v / (c * x) } else { 0.0 })
        .collect();
    if r.len() >= 3 && r[0] == 0.0 {
        let (x1, x2) = (r[1], r[2]);
        out[0] = (x2 * out[1] - x1 * out[2]) / (x2 - x1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jost::Interpolation;
    use crate::numerics::{build_radial_grid, build_spectral_grid, Grading};
    use crate::potentials::PotentialModel;

    #[test]
    fn free_coefficients() {
        let (cp, cm) = scattering_coeffs(C::new(1.0, 0.0), 2.0, C::new(0.0, 0.0), false, 1e-3).unwrap();
        assert!((cp - C::new(0.0, -0.5)).norm() < 1e-16);
        assert_eq!(cm, C::new(0.0, 0.5));
        let w = realizing_phase(cp);
        assert!((w - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!(scattering_coeffs(C::new(0.0, 0.0), 1.0, C::new(0.0, 1.0), false, 1e-3).is_err());
    }

    #[test]
    fn phase_makes_eigenfunction_real() {
        for t in [0.1, 1.0, 2.5, -2.0] {
            let f0 = C::from_polar(0.7, t);
            let (cp, cm) = scattering_coeffs(f0, 1.0, C::new(0.0, 1.0), false, 1e-3).unwrap();
            assert!((cp.norm() - 0.5).abs() < 1e-15);
            let w = realizing_phase(cp);
            for s in [0.3, 1.9, -0.4] {
                let f = C::from_polar(1.3, s);
                let e = cp * f + cm * f.conj();
                assert!((w * e).im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn free_basis_is_sine() {
        let g = build_radial_grid(10.0, 512, Grading::Uniform).unwrap();
        let s = build_spectral_grid(-2, 1, 10.0).unwrap();
        let solver = JostSolver::new(&PotentialModel::free(), &g, Interpolation::Cubic);
        let (b, _) = build_eigenbasis(&solver, &g, &s, SpectralOptions::default()).unwrap();
        for j in (0..s.len()).step_by(37) {
            for i in (0..g.len()).step_by(41) {
                let e = b.etilde(i, j);
                assert!((e - (g.nodes()[i] * s.nodes()[j]).sin()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn radial_round_trip() {
        let r: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let f: Vec<f64> = r.iter().map(|x| (-x * x).exp()).collect();
        let back = lower_radial(&r, &lift_radial(&r, &f));
        for (a, b) in f.iter().zip(&back).skip(1) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((back[0] - 1.0).abs() < 0.02);
    }
}

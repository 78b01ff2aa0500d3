//! Jost solutions `f(r,k) = e^{irk} m(r,k)`, scattering data at the origin,
//! zero-energy resonances and bound states.

mod bound;
mod scattering;
mod sweep;

use ndarray::Array2;
use num_complex::Complex64 as C;
use rayon::prelude::*;

pub use bound::{find_bound_states, BoundState, BoundStateSet};
pub use scattering::{
    detect_resonance, scattering_at_origin, ResonanceReport, ScatteringData, RESONANCE_EPS,
};
pub use sweep::{Interpolation, SweepPlan};

use crate::numerics::RadialGrid;
use crate::potentials::PotentialModel;

const I: C = C { re: 0.0, im: 1.0 };

/// `m(·,k)` and `∂ᵣm(·,k)` on every radial node.
#[derive(Debug, Clone)]
pub struct JostColumn {
    pub k: f64,
    pub m: Vec<C>,
    pub dm_dr: Vec<C>,
    /// Determinant of the `c±` system.
    pub det: C,
}

impl JostColumn {
    pub fn f0(&self) -> C {
        self.m[0]
    }

    /// `f′(0,k) = ik·m(0,k) + ∂ᵣm(0,k)`.
    pub fn f0_prime(&self) -> C {
        I * self.k * self.m[0] + self.dm_dr[0]
    }
}

/// `∂ₖm(·,k)` and `∂ᵣ∂ₖm(·,k)` on every radial node.
#[derive(Debug, Clone)]
pub struct DkColumn {
    pub k: f64,
    pub dm_dk: Vec<C>,
    pub drdk_m: Vec<C>,
}

/// Volterra solver bound to one potential and one radial grid.
#[derive(Debug, Clone)]
pub struct JostSolver {
    plan: SweepPlan,
    v: Vec<f64>,
    r: Vec<f64>,
    tail_error: f64,
    first_moment: f64,
}

impl JostSolver {
    pub fn new(p: &PotentialModel, grid: &RadialGrid, interpolation: Interpolation) -> Self {
        Self {
            plan: SweepPlan::new(grid, interpolation),
            v: p.sample(grid),
            r: grid.nodes().to_vec(),
            tail_error: p.tail_error(grid.r_max()),
            first_moment: p.first_moment(grid),
        }
    }

    pub fn plan(&self) -> &SweepPlan {
        &self.plan
    }

    pub fn potential_samples(&self) -> &[f64] {
        &self.v
    }

    pub fn nodes(&self) -> &[f64] {
        &self.r
    }

    /// `∫_{r_max}^∞ r|V|`, the mass dropped by truncating at `r_max`.
    pub fn tail_error(&self) -> f64 {
        self.tail_error
    }

    /// `exp(∫₀^∞ r|V|)`, the classical bound on `sup |m|`.
    pub fn uniform_bound(&self) -> f64 {
        (self.first_moment + self.tail_error).exp()
    }

    pub fn solve_m(&self, k: f64) -> JostColumn {
        let (m, w) = self.plan.sweep(k, &self.v, None, C::new(1.0, 0.0));
        // ∫ V conj(m) with the sweep's interpolant; ∫ e^{2ikr} V m = −∂ᵣm(0)
        let g: Vec<C> = m.iter().zip(&self.v).map(|(m, v)| m * v).collect();
        let vm_int = self.plan.integrate_interpolant(&g);
        let f0 = m[0];
        let f0p = I * k * m[0] + w[0];
        let phased = -w[0];
        let det = f0 * f0p.conj() - f0.conj() * f0p + f0 * vm_int.conj() - f0.conj() * phased;
        JostColumn {
            k,
            m,
            dm_dr: w,
            det,
        }
    }

    /// Differentiated equation `u″ + 2ik u′ = V u − 2i ∂ᵣm`, `u(r_max) = 0`.
    pub fn solve_dm_dk(&self, col: &JostColumn) -> DkColumn {
        let src: Vec<C> = col.dm_dr.iter().map(|w| -2.0 * I * w).collect();
        let (dm_dk, drdk_m) = self
            .plan
            .sweep(col.k, &self.v, Some(&src), C::new(0.0, 0.0));
        DkColumn {
            k: col.k,
            dm_dk,
            drdk_m,
        }
    }

    /// `(f(0,k), f′(0,k), D(k))`.
    pub fn origin_data(&self, col: &JostColumn) -> (C, C, C) {
        (col.f0(), col.f0_prime(), col.det)
    }
}

/// Stand-alone `m(·,k)` sweep.
pub fn solve_m(p: &PotentialModel, grid: &RadialGrid, k: f64) -> JostColumn {
    JostSolver::new(p, grid, Interpolation::default()).solve_m(k)
}

/// Stand-alone `(∂ₖm, ∂ᵣ∂ₖm)` sweep.
pub fn solve_dm_dk(p: &PotentialModel, grid: &RadialGrid, k: f64) -> DkColumn {
    let s = JostSolver::new(p, grid, Interpolation::default());
    s.solve_dm_dk(&s.solve_m(k))
}

/// `m`, `∂ᵣm` (and optionally `∂ₖm`) on a subset of radial rows × k nodes.
#[derive(Debug, Clone)]
pub struct JostTable {
    pub rows: Vec<usize>,
    pub r: Vec<f64>,
    pub k: Vec<f64>,
    /// `f(0,k) = m(0,k)` for every `k`.
    pub f0: Vec<C>,
    pub m: Array2<C>,
    pub dm_dr: Array2<C>,
    pub dm_dk: Option<Array2<C>>,
    /// `m(r,0)` on the retained rows (real).
    pub m_zero: Vec<f64>,
    /// `∂ᵣm(r,0)` on the retained rows (real).
    pub dm_dr_zero: Vec<f64>,
    pub tail_error: f64,
    pub uniform_bound: f64,
}

impl JostTable {
    /// Sweeps every `k` once, keeping `rows`. Parallel over `k`.
    pub fn build(solver: &JostSolver, ks: &[f64], rows: &[usize], with_dk: bool) -> Self {
        let cols: Vec<(C, Vec<C>, Vec<C>, Option<Vec<C>>)> = ks
            .par_iter()
            .map(|&k| {
                let col = solver.solve_m(k);
                let dk = with_dk.then(|| {
                    let d = solver.solve_dm_dk(&col);
                    rows.iter().map(|&i| d.dm_dk[i]).collect()
                });
                (
                    col.m[0],
                    rows.iter().map(|&i| col.m[i]).collect(),
                    rows.iter().map(|&i| col.dm_dr[i]).collect(),
                    dk,
                )
            })
            .collect();
        let (nr, nk) = (rows.len(), ks.len());
        let mut m = Array2::zeros((nr, nk));
        let mut dm_dr = Array2::zeros((nr, nk));
        let mut dm_dk = with_dk.then(|| Array2::zeros((nr, nk)));
        let mut f0 = Vec::with_capacity(nk);
        for (j, (c0, cm, cw, cd)) in cols.into_iter().enumerate() {
            f0.push(c0);
            for i in 0..nr {
                m[[i, j]] = cm[i];
                dm_dr[[i, j]] = cw[i];
            }
            if let (Some(t), Some(cd)) = (dm_dk.as_mut(), cd) {
                for i in 0..nr {
                    t[[i, j]] = cd[i];
                }
            }
        }
        let zero = solver.solve_m(0.0);
        Self {
            rows: rows.to_vec(),
            r: rows.iter().map(|&i| solver.nodes()[i]).collect(),
            k: ks.to_vec(),
            f0,
            m,
            dm_dr,
            dm_dk,
            m_zero: rows.iter().map(|&i| zero.m[i].re).collect(),
            dm_dr_zero: rows.iter().map(|&i| zero.dm_dr[i].re).collect(),
            tail_error: solver.tail_error(),
            uniform_bound: solver.uniform_bound(),
        }
    }

    /// `sup |m|` over the table.
    pub fn sup_abs_m(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{build_radial_grid, Grading};
    use crate::potentials::aubin_potential;

    #[test]
    fn free_case_is_trivial() {
        let g = build_radial_grid(10.0, 128, Grading::Uniform).unwrap();
        let s = JostSolver::new(&PotentialModel::free(), &g, Interpolation::Cubic);
        let col = s.solve_m(2.0);
        assert!(col.m.iter().all(|z| *z == C::new(1.0, 0.0)));
        assert_eq!(col.f0_prime(), C::new(0.0, 2.0));
        let d = s.solve_dm_dk(&col);
        assert!(d.dm_dk.iter().all(|z| z.norm() == 0.0));
        let (_, _, det) = s.origin_data(&col);
        assert!((det - C::new(0.0, -4.0)).norm() < 1e-15);
    }

    #[test]
    fn determinant_matches_minus_two_ik_f0() {
        let g = build_radial_grid(50.0, 2048, Grading::Uniform).unwrap();
        let p = aubin_potential(1.0).unwrap();
        for interp in [Interpolation::Linear, Interpolation::Cubic] {
            let s = JostSolver::new(&p, &g, interp);
            for &k in &[0.1, 1.0, 4.0] {
                let col = s.solve_m(k);
                let (f0, _, det) = s.origin_data(&col);
                let rhs = -2.0 * I * k * f0;
                assert!((det - rhs).norm() <= 1e-10 * rhs.norm(), "k={k}");
            }
        }
    }

    #[test]
    fn table_rows_match_columns() {
        let g = build_radial_grid(20.0, 256, Grading::Uniform).unwrap();
        let p = aubin_potential(1.0).unwrap();
        let s = JostSolver::new(&p, &g, Interpolation::Cubic);
        let t = JostTable::build(&s, &[0.5, 1.5], &[0, 10, 255], true);
        let c = s.solve_m(1.5);
        assert_eq!(t.m[[1, 1]], c.m[10]);
        assert_eq!(t.m[[2, 0]], C::new(1.0, 0.0));
        assert!(t.sup_abs_m() <= t.uniform_bound);
        assert!(t.m_zero[0].abs() < 0.1);
    }
}

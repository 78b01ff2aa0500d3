//! Backward product-integration sweep for `m″ + 2ik m′ = V m + s`.
//!
//! With `w = m′` the equation reads `(e^{2ikr} w)′ = e^{2ikr} g`, `g = Vm + s`.
//! On each interval `[a, b]` the source `g` is replaced by a polynomial
//! interpolant and the phase is integrated exactly, so the step is exact for
//! piecewise-polynomial sources and uniformly stable as `k → 0`.

use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::numerics::RadialGrid;

const I: C = C { re: 0.0, im: 1.0 };
const ZERO: C = C { re: 0.0, im: 0.0 };
const MAX_STENCIL: usize = 4;
/// Below this phase the moments come from their Taylor series.
const TAYLOR_CUTOFF: f64 = 2.0;

/// Interpolant used for `g = V m` on each interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    Linear,
    #[default]
    Cubic,
}

impl Interpolation {
    fn stencil(self) -> usize {
        match self {
            Interpolation::Linear => 2,
            Interpolation::Cubic => 4,
        }
    }
}

/// Moments `I_n(θ) = ∫₀¹ xⁿ e^{iθx} dx` for `n = 0..N`.
pub(crate) fn phase_moments<const N: usize>(theta: f64) -> [C; N] {
    let mut out = [ZERO; N];
    if theta.abs() <= TAYLOR_CUTOFF {
        let z = I * theta;
        for (n, slot) in out.iter_mut().enumerate() {
            let mut term = C::new(1.0, 0.0);
            let mut acc = C::new(1.0 / (n as f64 + 1.0), 0.0);
            for m in 1..60 {
                term = term * z / m as f64;
                let add = term / (n + m + 1) as f64;
                acc += add;
                if add.norm() < 1e-18 {
                    break;
                }
            }
            *slot = acc;
        }
    } else {
        let e = C::from_polar(1.0, theta);
        let inv = 1.0 / (I * theta);
        out[0] = (e - 1.0) * inv;
        for n in 1..N {
            out[n] = (e - out[n - 1] * n as f64) * inv;
        }
    }
    out
}

/// Geometry of one interval: width and the monomial coefficients of the
/// Lagrange basis on its stencil, in the local variable `x = (r − a)/Δ`.
#[derive(Debug, Clone, PartialEq)]
struct Class {
    delta: f64,
    len: usize,
    coef: [[f64; MAX_STENCIL]; MAX_STENCIL],
}

/// Per-`k` step coefficients of one interval class.
#[derive(Debug, Clone, Copy)]
struct Step {
    phase: C,
    delta_i0: C,
    a: [C; MAX_STENCIL],
    b: [C; MAX_STENCIL],
}

/// Precomputed interval geometry for a radial grid.
#[derive(Debug, Clone)]
pub struct SweepPlan {
    n: usize,
    classes: Vec<Class>,
    class_of: Vec<usize>,
    interpolation: Interpolation,
}

fn lagrange_monomials(xs: &[f64]) -> [[f64; MAX_STENCIL]; MAX_STENCIL] {
    let mut out = [[0.0; MAX_STENCIL]; MAX_STENCIL];
    for (j, &xj) in xs.iter().enumerate() {
        let mut poly = vec![1.0];
        let mut denom = 1.0;
        for (m, &xm) in xs.iter().enumerate() {
            if m == j {
                continue;
            }
            let mut next = vec![0.0; poly.len() + 1];
            for (p, &c) in poly.iter().enumerate() {
                next[p + 1] += c;
                next[p] -= xm * c;
            }
            poly = next;
            denom *= xj - xm;
        }
        for (p, c) in poly.into_iter().enumerate() {
            out[j][p] = c / denom;
        }
    }
    out
}

impl SweepPlan {
    pub fn new(grid: &RadialGrid, interpolation: Interpolation) -> Self {
        Self::from_nodes(grid.nodes(), interpolation)
    }

    /// Plan on an arbitrary increasing node set starting at the origin.
    pub fn from_nodes(r: &[f64], interpolation: Interpolation) -> Self {
        let n = r.len();
        let q = interpolation.stencil();
        let mut classes: Vec<Class> = Vec::new();
        let mut class_of = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let delta = r[i + 1] - r[i];
            let len = q.min(n - i);
            let xs: Vec<f64> = (0..len).map(|j| (r[i + j] - r[i]) / delta).collect();
            let coef = lagrange_monomials(&xs);
            let same = |c: &Class| {
                c.len == len
                    && (c.delta - delta).abs() <= 1e-12 * delta
                    && c
                        .coef
                        .iter()
                        .flatten()
                        .zip(coef.iter().flatten())
                        .all(|(x, y)| (x - y).abs() <= 1e-10 * (1.0 + y.abs()))
            };
            let id = match classes.iter().rposition(same) {
                Some(id) => id,
                None => {
                    classes.push(Class { delta, len, coef });
                    classes.len() - 1
                }
            };
            class_of.push(id);
        }
        Self {
            n,
            classes,
            class_of,
            interpolation,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interpolation
    }

    fn steps(&self, k: f64) -> Vec<Step> {
        self.classes
            .iter()
            .map(|c| {
                let theta = 2.0 * k * c.delta;
                let mom: [C; MAX_STENCIL + 1] = phase_moments(theta);
                let d = c.delta;
                let mut a = [ZERO; MAX_STENCIL];
                let mut b = [ZERO; MAX_STENCIL];
                for j in 0..c.len {
                    for p in 0..c.len {
                        let cj = c.coef[j][p];
                        a[j] += mom[p] * (d * cj);
                        b[j] += (mom[0] - mom[p + 1]) * (d * d * cj / (p as f64 + 1.0));
                    }
                }
                Step {
                    phase: C::from_polar(1.0, theta),
                    delta_i0: mom[0] * d,
                    a,
                    b,
                }
            })
            .collect()
    }

    /// Solves `m″ + 2ik m′ = V m + src` backward from `m(r_max) = m_end`,
    /// `m′(r_max) = 0`. Returns `(m, m′)` at every node.
    pub fn sweep(&self, k: f64, v: &[f64], src: Option<&[C]>, m_end: C) -> (Vec<C>, Vec<C>) {
        let n = self.n;
        assert_eq!(v.len(), n, "potential samples must match the grid");
        let steps = self.steps(k);
        let mut m = vec![ZERO; n];
        let mut w = vec![ZERO; n];
        let mut g = vec![ZERO; n];
        let s = |i: usize| src.map_or(ZERO, |s| s[i]);
        m[n - 1] = m_end;
        g[n - 1] = m_end * v[n - 1] + s(n - 1);
        for i in (0..n - 1).rev() {
            let st = &steps[self.class_of[i]];
            let len = self.classes[self.class_of[i]].len;
            let mut rest = m[i + 1] - st.delta_i0 * w[i + 1] + st.b[0] * s(i);
            let mut wacc = st.phase * w[i + 1];
            for j in 1..len {
                rest += st.b[j] * g[i + j];
                wacc -= st.a[j] * g[i + j];
            }
            m[i] = rest / (1.0 - st.b[0] * v[i]);
            g[i] = m[i] * v[i] + s(i);
            w[i] = wacc - st.a[0] * g[i];
        }
        (m, w)
    }

    /// `∫₀^{r_max}` of the same piecewise interpolant the sweep uses.
    pub fn integrate_interpolant(&self, g: &[C]) -> C {
        let mut acc = ZERO;
        for (i, &cid) in self.class_of.iter().enumerate() {
            let c = &self.classes[cid];
            for j in 0..c.len {
                let mut wj = 0.0;
                for p in 0..c.len {
                    wj += c.coef[j][p] / (p as f64 + 1.0);
                }
                acc += g[i + j] * (c.delta * wj);
            }
        }
        acc
    }

    /// Number of distinct interval classes (1-3 on uniform grids).
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{build_radial_grid, Grading};

    #[test]
    fn moments_agree_across_cutoff() {
        for &t in &[1e-9, 0.3, 1.99, 2.01, 5.0, 40.0] {
            let m: [C; 5] = phase_moments(t);
            // independent midpoint quadrature with many points
            let n = 200_000;
            for (p, mp) in m.iter().enumerate() {
                let mut acc = ZERO;
                for q in 0..n {
                    let x = (q as f64 + 0.5) / n as f64;
                    acc += C::from_polar(x.powi(p as i32), t * x);
                }
                acc /= n as f64;
                assert!((acc - mp).norm() < 1e-8, "theta={t} n={p}");
            }
        }
    }

    #[test]
    fn lagrange_reproduces_monomials() {
        let c = lagrange_monomials(&[0.0, 1.0, 2.5, 3.0]);
        let x = 0.37_f64;
        let vals = [x.powi(0), x, x * x, x * x * x];
        let nodes = [0.0_f64, 1.0, 2.5, 3.0];
        for p in 0..4 {
            let mut s = 0.0;
            for j in 0..4 {
                let lj: f64 = (0..4).map(|q| c[j][q] * x.powi(q as i32)).sum();
                s += lj * nodes[j].powi(p as i32);
            }
            assert!((s - vals[p]).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_potential_gives_unit_modulation() {
        let g = build_radial_grid(20.0, 257, Grading::Uniform).unwrap();
        for interp in [Interpolation::Linear, Interpolation::Cubic] {
            let plan = SweepPlan::new(&g, interp);
            assert!(plan.class_count() <= 4);
            let (m, w) = plan.sweep(1.3, &vec![0.0; g.len()], None, C::new(1.0, 0.0));
            assert!(m.iter().all(|z| (z - 1.0).norm() == 0.0));
            assert!(w.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn constant_source_is_integrated_exactly() {
        // m″ + 2ik m′ = 1 with m(R)=0, m′(R)=0 has a closed form.
        let (r_max, k) = (3.0, 0.7);
        let g = build_radial_grid(r_max, 64, Grading::GradedAtZero).unwrap();
        let plan = SweepPlan::new(&g, Interpolation::Cubic);
        let src = vec![C::new(1.0, 0.0); g.len()];
        let (m, w) = plan.sweep(k, &vec![0.0; g.len()], Some(&src), ZERO);
        let two_ik = 2.0 * I * k;
        let w_exact = |r: f64| (1.0 - (two_ik * (r_max - r)).exp()) / two_ik;
        let m_exact = |r: f64| {
            let d = r_max - r;
            -(d / two_ik) + ((two_ik * d).exp() - 1.0) / (two_ik * two_ik)
        };
        for (i, &r) in g.nodes().iter().enumerate() {
            assert!((w[i] - w_exact(r)).norm() < 1e-12);
            assert!((m[i] - m_exact(r)).norm() < 1e-12);
        }
    }
}

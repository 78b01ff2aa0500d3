use serde::{Deserialize, Serialize};

use crate::numerics::RadialGrid;
use crate::potentials::PotentialModel;
use crate::{Error, Result};

const SUBDIVISIONS: usize = 64;
const MAX_BISECTIONS: usize = 100;
const TOP_ENERGY: f64 = -1e-6;
/// RK4 steps per grid interval.
const SHOOT_SUBSTEPS: usize = 4;
/// Rescale the shooting solution once it exceeds this size.
const RENORM: f64 = 1e100;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundState {
    pub energy: f64,
    /// Samples on the radial grid, unit `L²(0, r_max)` norm, positive slope
    /// at the origin.
    pub psi: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BoundStateSet {
    pub states: Vec<BoundState>,
}

impl BoundStateSet {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.energy).collect()
    }

    /// Largest `|⟨φ_a, φ_b⟩ − δ_ab|`.
    pub fn orthonormality_defect(&self, grid: &RadialGrid) -> f64 {
        let mut worst = 0.0_f64;
        for (a, sa) in self.states.iter().enumerate() {
            for (b, sb) in self.states.iter().enumerate() {
                let ip = grid.inner(&sa.psi, &sb.psi);
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }
}

/// RK4 integration of `u″ = (V − E) u` from `r0` to `r1`.
fn rk4(p: &PotentialModel, e: f64, r0: f64, r1: f64, mut u: f64, mut du: f64) -> (f64, f64) {
    let h = (r1 - r0) / SHOOT_SUBSTEPS as f64;
    for s in 0..SHOOT_SUBSTEPS {
        let a = r0 + s as f64 * h;
        (u, du) = rk4_step(p, e, a, h, u, du);
    }
    (u, du)
}

fn rk4_step(p: &PotentialModel, e: f64, r0: f64, h: f64, u: f64, du: f64) -> (f64, f64) {
    let r1 = r0 + h;
    let q = |r: f64| p.value(r) - e;
    let (q0, qm, q1) = (q(r0), q(r0 + 0.5 * h), q(r1));
    let (k1u, k1d) = (du, q0 * u);
    let (k2u, k2d) = (du + 0.5 * h * k1d, qm * (u + 0.5 * h * k1u));
    let (k3u, k3d) = (du + 0.5 * h * k2d, qm * (u + 0.5 * h * k2u));
    let (k4u, k4d) = (du + h * k3d, q1 * (u + h * k3u));
    (
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        du + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    )
}

/// Outward solution with `u(0) = 0`, `u′(0) = 1` up to node `stop`, rescaled
/// by positive factors. Returns samples and the number of interior zeros.
fn shoot_out(p: &PotentialModel, r: &[f64], e: f64, stop: usize) -> (Vec<f64>, Vec<f64>, usize) {
    let mut u = vec![0.0; stop + 1];
    let mut du = vec![0.0; stop + 1];
    du[0] = 1.0;
    let mut zeros = 0;
    for i in 0..stop {
        let (a, b) = rk4(p, e, r[i], r[i + 1], u[i], du[i]);
        u[i + 1] = a;
        du[i + 1] = b;
        if i > 0 && u[i + 1] * u[i] < 0.0 || (u[i] == 0.0 && i > 0) {
            zeros += 1;
        }
        let size = a.abs().max(b.abs());
        if size > RENORM {
            for x in u[..=i + 1].iter_mut().chain(du[..=i + 1].iter_mut()) {
                *x /= size;
            }
        }
    }
    (u, du, zeros)
}

/// Inward decaying solution from `r_max` down to node `stop`.
fn shoot_in(p: &PotentialModel, r: &[f64], e: f64, stop: usize) -> Vec<f64> {
    let n = r.len();
    let kappa = (-e).sqrt();
    let mut u = vec![0.0; n];
    u[n - 1] = 1.0;
    let mut du = -kappa;
    for i in (stop..n - 1).rev() {
        let (a, b) = rk4(p, e, r[i + 1], r[i], u[i + 1], du);
        u[i] = a;
        du = b;
        let size = a.abs().max(b.abs());
        if size > RENORM {
            for x in u[i..].iter_mut() {
                *x /= size;
            }
            du /= size;
        }
    }
    u
}

/// Number of eigenvalues of the Dirichlet problem on `[0, r_max]` below `e`.
fn count_below(p: &PotentialModel, r: &[f64], e: f64) -> usize {
    shoot_out(p, r, e, r.len() - 1).2
}

/// Negative eigenvalues of `−∂ᵣᵣ + V` with `u(0) = 0`, by Sturm counting.
///
/// Each eigenvalue is isolated by bisecting the zero count of the outward
/// solution; the eigenfunction is assembled from the outward solution up to
/// the outer turning point and the decaying inward solution beyond it, then
/// normalized and Gram-Schmidt orthonormalized against earlier states.
pub fn find_bound_states(p: &PotentialModel, grid: &RadialGrid) -> Result<BoundStateSet> {
    if p.is_free() {
        return Ok(BoundStateSet::default());
    }
    let r = grid.nodes();
    let vmax = r.iter().map(|&x| p.value(x).abs()).fold(0.0, f64::max);
    let e_lo = -2.0 * vmax;
    if e_lo >= TOP_ENERGY {
        return Ok(BoundStateSet::default());
    }
    let energies: Vec<f64> = (0..=SUBDIVISIONS)
        .map(|i| e_lo + (TOP_ENERGY - e_lo) * i as f64 / SUBDIVISIONS as f64)
        .collect();
    let counts: Vec<usize> = energies.iter().map(|&e| count_below(p, r, e)).collect();

    let mut states: Vec<BoundState> = Vec::new();
    for w in 0..SUBDIVISIONS {
        for target in counts[w]..counts[w + 1] {
            let (mut lo, mut hi) = (energies[w], energies[w + 1]);
            let mut iterations = 0;
            while hi - lo > 4.0 * f64::EPSILON * hi.abs().max(1e-300) {
                if iterations == MAX_BISECTIONS {
                    return Err(Error::Bisection { lo, hi, iterations });
                }
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if count_below(p, r, mid) > target {
                    hi = mid;
                } else {
                    lo = mid;
                }
                iterations += 1;
            }
            let e = 0.5 * (lo + hi);
            let psi = eigenfunction(p, grid, e);
            states.push(BoundState { energy: e, psi });
        }
    }

    for a in 0..states.len() {
        for b in 0..a {
            let ip = grid.inner(&states[a].psi, &states[b].psi);
            let prev = states[b].psi.clone();
            for (x, y) in states[a].psi.iter_mut().zip(prev) {
                *x -= ip * y;
            }
        }
        let norm = grid.l2_norm(&states[a].psi);
        for x in states[a].psi.iter_mut() {
            *x /= norm;
        }
    }
    Ok(BoundStateSet { states })
}

fn eigenfunction(p: &PotentialModel, grid: &RadialGrid, e: f64) -> Vec<f64> {
    let r = grid.nodes();
    let n = r.len();
    // outer classical turning point, pushed a little into the forbidden zone
    let turning = (0..n).rev().find(|&i| p.value(r[i]) < e).unwrap_or(n / 4);
    let kappa = (-e).sqrt();
    let push = grid.nearest(r[turning] + 2.0 / kappa);
    let m = push.clamp(turning.min(n - 2), n - 2).max(1);
    let (out, _, _) = shoot_out(p, r, e, m);
    let inn = shoot_in(p, r, e, m);
    let scale = out[m] / inn[m];
    let mut psi: Vec<f64> = (0..n)
        .map(|i| if i <= m { out[i] } else { scale * inn[i] })
        .collect();
    let norm = grid.l2_norm(&psi);
    let sign = if psi[1] < 0.0 { -1.0 } else { 1.0 };
    for x in psi.iter_mut() {
        *x *= sign / norm;
    }
    psi
}

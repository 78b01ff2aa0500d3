use std::f64::consts::{FRAC_1_PI, FRAC_2_PI, PI};

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use super::{Multiplier, Support};
use crate::jost::{JostSolver, JostTable};
use crate::numerics::SpectralGrid;
use crate::spectral::{c_minus, scattering_coeffs, Eigenbasis, SpectralOptions};
use crate::{Error, Result};

/// Largest dense kernel, in entries, that the assemblers will allocate.
pub const MAX_KERNEL_ENTRIES: usize = 1 << 26;

const I: C = C { re: 0.0, im: 1.0 };

fn guard(rows: usize, cols: usize) -> Result<()> {
    if rows.saturating_mul(cols) > MAX_KERNEL_ENTRIES {
        return Err(Error::MemoryGuard {
            rows,
            cols,
            limit: MAX_KERNEL_ENTRIES,
        });
    }
    Ok(())
}

/// `K(r_a, r_b) = (2/π)∫ μ(k) ẽ(r_a,k) conj ẽ(r_b,k) dk` from the eigenbasis,
/// for radial node indices `rows × cols`.
pub fn assemble_kernel(
    basis: &Eigenbasis,
    mu: &Multiplier,
    rows: &[usize],
    cols: &[usize],
) -> Result<Array2<f64>> {
    guard(rows.len(), cols.len())?;
    let nr = basis.r().len();
    if let Some(&bad) = rows.iter().chain(cols).find(|&&i| i >= nr) {
        return Err(Error::arg("rows", format!("index {bad} outside {nr} nodes")));
    }
    let active: Vec<(usize, f64)> = basis
        .k()
        .iter()
        .zip(basis.k_weights())
        .enumerate()
        .map(|(j, (&k, &w))| (j, w * mu.value(k)))
        .filter(|(_, w)| *w != 0.0)
        .collect();
    let table = basis.table();
    let mut a = Array2::<f64>::zeros((rows.len(), active.len()));
    let mut b = Array2::<f64>::zeros((active.len(), cols.len()));
    for (q, &(j, w)) in active.iter().enumerate() {
        for (p, &i) in rows.iter().enumerate() {
            a[[p, q]] = FRAC_2_PI * w * table[[j, i]];
        }
        for (p, &i) in cols.iter().enumerate() {
            b[[q, p]] = table[[j, i]];
        }
    }
    Ok(a.dot(&b))
}

/// `Σ_b K(r_a, r_b) f(r_b) w_b` with the eigenbasis radial weights; `kernel`
/// must span every radial node in its columns.
pub fn kernel_matvec(basis: &Eigenbasis, kernel: &Array2<f64>, f: &[f64]) -> Result<Vec<f64>> {
    if kernel.ncols() != f.len() || f.len() != basis.r().len() {
        return Err(Error::GridMismatch(format!(
            "kernel with {} columns applied to {} samples",
            kernel.ncols(),
            f.len()
        )));
    }
    let wf: Vec<f64> = f.iter().zip(basis.r_weights()).map(|(a, w)| a * w).collect();
    Ok(kernel.dot(&ndarray::ArrayView1::from(&wf)).to_vec())
}

/// Jost data on a subset of radial rows and the `k` nodes of one spectral
/// window, with `c₊(k)` and zero-energy columns, for kernel pieces.
#[derive(Debug, Clone)]
pub struct KernelTables {
    pub jost: JostTable,
    pub k_weights: Vec<f64>,
    pub c_plus: Vec<C>,
    pub resonant: bool,
    pub f0_at_zero: f64,
    /// Radial mesh of the underlying grid.
    pub mesh: f64,
}

impl KernelTables {
    pub fn r(&self) -> &[f64] {
        &self.jost.r
    }

    pub fn k(&self) -> &[f64] {
        &self.jost.k
    }
}

/// Sweeps every spectral node in `[k_lo, k_hi]` and keeps `rows`.
pub fn build_kernel_tables(
    solver: &JostSolver,
    spectral: &SpectralGrid,
    rows: &[usize],
    k_lo: f64,
    k_hi: f64,
    opts: &SpectralOptions,
) -> Result<KernelTables> {
    let nr = solver.nodes().len();
    if let Some(&bad) = rows.iter().find(|&&i| i >= nr) {
        return Err(Error::arg("rows", format!("index {bad} outside {nr} nodes")));
    }
    let range = spectral.index_range(k_lo, k_hi);
    let ks = &spectral.nodes()[range.clone()];
    let k_weights = spectral.weights()[range].to_vec();
    let jost = JostTable::build(solver, ks, rows, false);
    let zero = solver.solve_m(0.0);
    let dk = solver.solve_dm_dk(&zero).dm_dk[0];
    let f0_at_zero = zero.m[0].re;
    let resonant = f0_at_zero.abs() < opts.resonance_eps;
    let c_plus = ks
        .iter()
        .zip(&jost.f0)
        .map(|(&k, &f0)| scattering_coeffs(f0, k, dk, resonant, opts.k_eps).map(|c| c.0))
        .collect::<Result<Vec<C>>>()?;
    let mesh = solver
        .nodes()
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    Ok(KernelTables {
        jost,
        k_weights,
        c_plus,
        resonant,
        f0_at_zero,
        mesh,
    })
}

/// Row factors `e^{irk}`, `f = e^{irk}m` and `∂ᵣf = e^{irk}(ik·m + ∂ᵣm)`.
struct Factors {
    phase: Array2<C>,
    f: Array2<C>,
    df: Array2<C>,
}

fn factors(t: &KernelTables, rows: &[usize]) -> Factors {
    let nk = t.k().len();
    let mut phase = Array2::zeros((rows.len(), nk));
    let mut f = Array2::zeros((rows.len(), nk));
    let mut df = Array2::zeros((rows.len(), nk));
    for (p, &a) in rows.iter().enumerate() {
        let r = t.jost.r[a];
        for (q, &k) in t.k().iter().enumerate() {
            let e = C::from_polar(1.0, r * k);
            let m = t.jost.m[[a, q]];
            phase[[p, q]] = e;
            f[[p, q]] = e * m;
            df[[p, q]] = e * (I * k * m + t.jost.dm_dr[[a, q]]);
        }
    }
    Factors { phase, f, df }
}

/// `Σ_k x[a,k]·w[k]·conj(y[b,k])`.
fn gram(x: &Array2<C>, w: &[C], y: &Array2<C>) -> Array2<C> {
    let mut xw = x.clone();
    for (mut col, wk) in xw.axis_iter_mut(Axis(1)).zip(w) {
        col *= *wk;
    }
    let yh = y.t().mapv(|z| z.conj());
    xw.dot(&yh)
}

/// `Σ_k x[a,k]·w[k]·y[b,k]`.
fn bilinear(x: &Array2<C>, w: &[C], y: &Array2<C>) -> Array2<C> {
    let mut xw = x.clone();
    for (mut col, wk) in xw.axis_iter_mut(Axis(1)).zip(w) {
        col *= *wk;
    }
    xw.dot(&y.t())
}

fn weights(t: &KernelTables, mu: &Multiplier) -> Vec<C> {
    t.k()
        .iter()
        .zip(&t.k_weights)
        .map(|(&k, &w)| C::new(w * mu.value(k), 0.0))
        .collect()
}

/// The pieces of `K` on the table rows × table rows.
///
/// With `f = e^{irk}m`, `K^{(+,+)} = (1/2π)∫ e^{i(r−r′)k} μ m(r) conj m(r′)`,
/// `K^{(−,−)} = conj K^{(+,+)}`, `K^{(+,−)} = (1/iπ)∫ e^{i(r+r′)k} μ c₊ m m′`
/// and `K^{(−,+)} = conj K^{(+,−)}`. `K₁` is the free cosine term
/// `(1/π)∫cos((r−r′)k)μ`, weighted by `m(r,0)m(r′,0)` at low energies,
/// `K₂ = K^{(+,+)} + K^{(−,−)} − K₁` and `K₃ = K^{(+,−)} + K^{(−,+)}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelDecomposition {
    pub support: Support,
    pub r: Vec<f64>,
    pub mesh: f64,
    /// Full kernel from `ẽ = c₊f + c₋ conj f`.
    pub k: Array2<f64>,
    pub kpp: Array2<C>,
    pub kmm: Array2<C>,
    pub kpm: Array2<C>,
    pub kmp: Array2<C>,
    pub k1: Array2<f64>,
    pub k2: Array2<f64>,
    pub k3: Array2<f64>,
    pub resonant: bool,
}

impl KernelDecomposition {
    /// `max |Kpp + Kmm + Kpm + Kmp − K| / max |K|`.
    pub fn piece_sum_defect(&self) -> f64 {
        let scale = sup_abs(&self.k).max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for ((idx, &k), pp) in self.k.indexed_iter().zip(self.kpp.iter()) {
            let s = pp + self.kmm[idx] + self.kpm[idx] + self.kmp[idx];
            worst = worst.max((s - k).norm());
        }
        worst / scale
    }

    /// `max |K(r,r′) − K(r′,r)| / max |K|`.
    pub fn symmetry_defect(&self) -> f64 {
        let scale = sup_abs(&self.k).max(f64::MIN_POSITIVE);
        let n = self.r.len();
        let mut worst = 0.0_f64;
        for a in 0..n {
            for b in 0..a {
                worst = worst.max((self.k[[a, b]] - self.k[[b, a]]).abs());
            }
        }
        worst / scale
    }
}

pub(crate) fn sup_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn low_k1(t: &KernelTables, rows_a: &[usize], rows_b: &[usize], cos: &Array2<f64>) -> Array2<f64> {
    let mut k1 = cos.clone();
    for (p, &a) in rows_a.iter().enumerate() {
        for (q, &b) in rows_b.iter().enumerate() {
            k1[[p, q]] *= t.jost.m_zero[a] * t.jost.m_zero[b];
        }
    }
    k1
}

fn active_support(mu: &Multiplier) -> Result<Support> {
    match mu.support() {
        Support::Full => Err(Error::Unsupported(
            "kernel decompositions need a multiplier supported in k ≥ 1 or k ≤ 1".into(),
        )),
        s => Ok(s),
    }
}

pub fn decompose_kernel(t: &KernelTables, mu: &Multiplier) -> Result<KernelDecomposition> {
    let support = active_support(mu)?;
    let n = t.r().len();
    guard(n, n)?;
    let all: Vec<usize> = (0..n).collect();
    let fac = factors(t, &all);
    let w = weights(t, mu);
    let wc: Vec<C> = w.iter().zip(&t.c_plus).map(|(w, c)| w * c).collect();

    let kpp = gram(&fac.f, &w, &fac.f).mapv(|z| z / (2.0 * PI));
    let kpm = bilinear(&fac.f, &wc, &fac.f).mapv(|z| z / (I * PI));
    let kmm = kpp.mapv(|z| z.conj());
    let kmp = kpm.mapv(|z| z.conj());
    let cos = gram(&fac.phase, &w, &fac.phase).mapv(|z| FRAC_1_PI * z.re);
    let k1 = match support {
        Support::High => cos,
        _ => low_k1(t, &all, &all, &cos),
    };
    let k2 = &kpp.mapv(|z| 2.0 * z.re) - &k1;
    let k3 = kpm.mapv(|z| 2.0 * z.re);

    let cm = c_minus();
    let mut e = Array2::<C>::zeros(fac.f.raw_dim());
    for ((idx, z), f) in e.indexed_iter_mut().zip(fac.f.iter()) {
        *z = t.c_plus[idx.1] * f + cm * f.conj();
    }
    let k = gram(&e, &w, &e).mapv(|z| FRAC_2_PI * z.re);

    Ok(KernelDecomposition {
        support,
        r: t.r().to_vec(),
        mesh: t.mesh,
        k,
        kpp,
        kmm,
        kpm,
        kmp,
        k1,
        k2,
        k3,
        resonant: t.resonant,
    })
}

/// `K₂(r_a, ·)` for the listed table rows against every table row.
pub fn k2_rows(t: &KernelTables, mu: &Multiplier, rows: &[usize]) -> Result<Array2<f64>> {
    let support = active_support(mu)?;
    let n = t.r().len();
    guard(rows.len(), n)?;
    let all: Vec<usize> = (0..n).collect();
    let fa = factors(t, rows);
    let fb = factors(t, &all);
    let w = weights(t, mu);
    let pp = gram(&fa.f, &w, &fb.f).mapv(|z| FRAC_1_PI * z.re);
    let cos = gram(&fa.phase, &w, &fb.phase).mapv(|z| FRAC_1_PI * z.re);
    let k1 = match support {
        Support::High => cos,
        _ => low_k1(t, rows, &all, &cos),
    };
    Ok(pp - k1)
}

/// `∂ᵣ` of `Σ_k w[k]·e^{i(r−r′)k}·m(r,r′;k)` in the first variable, with
/// `m(r,r′;k) = m(r,k) conj m(r′,k) − m(r,0)m(r′,0)` (low energies) or
/// `m(r,k) conj m(r′,k) − 1` (high energies).
fn dr_remainder(t: &KernelTables, w: &[C], support: Support) -> Array2<C> {
    let n = t.r().len();
    let all: Vec<usize> = (0..n).collect();
    let fac = factors(t, &all);
    let main = gram(&fac.df, w, &fac.f);
    let wik: Vec<C> = w.iter().zip(t.k()).map(|(w, &k)| w * I * k).collect();
    let q1 = gram(&fac.phase, &wik, &fac.phase);
    match support {
        Support::High => main - q1,
        _ => {
            let q0 = gram(&fac.phase, w, &fac.phase);
            let (m0, dm0) = (&t.jost.m_zero, &t.jost.dm_dr_zero);
            let mut out = main;
            for ((a, b), z) in out.indexed_iter_mut() {
                *z -= m0[b] * (m0[a] * q1[[a, b]] + dm0[a] * q0[[a, b]]);
            }
            out
        }
    }
}

/// `∂ᵣK₂(r,r′)` on table rows × table rows, differentiated under the integral.
pub fn dr_k2(t: &KernelTables, mu: &Multiplier) -> Result<Array2<f64>> {
    let support = active_support(mu)?;
    let n = t.r().len();
    guard(n, n)?;
    let w = weights(t, mu);
    Ok(dr_remainder(t, &w, support).mapv(|z| FRAC_1_PI * z.re))
}

/// `|∂ᵣK_j^{(+,+)}(r,r′)|` for the block `ψ(2^{−j}k)μ(k)` of the low-energy
/// split.
pub fn dr_block_kernel(t: &KernelTables, mu: &Multiplier, j: i32) -> Result<Array2<f64>> {
    let support = active_support(mu)?;
    let n = t.r().len();
    guard(n, n)?;
    let block = Multiplier::Dyadic {
        j,
        bump: Default::default(),
    };
    let w: Vec<C> = t
        .k()
        .iter()
        .zip(&t.k_weights)
        .map(|(&k, &w)| C::new(w * mu.value(k) * block.value(k), 0.0))
        .collect();
    Ok(dr_remainder(t, &w, support).mapv(|z| z.norm() / (2.0 * PI)))
}

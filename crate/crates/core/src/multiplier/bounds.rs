use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::kernel::{dr_block_kernel, dr_k2, k2_rows, sup_abs};
use super::{KernelDecomposition, KernelTables, Multiplier, Support};
use crate::numerics::{fit_slope, loglog_slope};
use crate::{Error, Result};

/// Pairs closer than this many radial meshes are left out of envelope fits.
const DIAGONAL_EXCLUSION: f64 = 4.0;
/// Pairs with `r + r′` below this are left out of envelope fits.
const ORIGIN_EXCLUSION: f64 = 1.0;
const ENVELOPE_BINS: usize = 10;
/// Smallest accepted slope of `log₂ C_j` against `j`: per-block constants
/// may shrink toward low energies but not grow.
pub const BLOCK_GROWTH_TOL: f64 = -0.25;

fn excluded(r: f64, rp: f64, mesh: f64) -> bool {
    (r - rp).abs() < DIAGONAL_EXCLUSION * mesh || r + rp < ORIGIN_EXCLUSION
}

/// Per logarithmic bin of `x ∈ [lo, hi]`, the largest `y` and its `x`.
fn binned_envelope(points: impl Iterator<Item = (f64, f64)>, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    let mut best = vec![(0.0, 0.0); ENVELOPE_BINS];
    let span = (hi / lo).ln();
    for (x, y) in points {
        if !(lo..=hi).contains(&x) || !y.is_finite() {
            continue;
        }
        let b = (((x / lo).ln() / span) * ENVELOPE_BINS as f64) as usize;
        let b = b.min(ENVELOPE_BINS - 1);
        if y > best[b].1 {
            best[b] = (x, y);
        }
    }
    best.into_iter().filter(|p| p.1 > 0.0).unzip()
}

fn envelope_slope(points: impl Iterator<Item = (f64, f64)>, lo: f64, hi: f64) -> f64 {
    let (xs, ys) = binned_envelope(points, lo, hi);
    if xs.len() < 2 {
        return f64::NAN;
    }
    loglog_slope(&xs, &ys)
}

fn pairs(r: &[f64]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..r.len()).flat_map(move |a| (0..r.len()).map(move |b| (a, b)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HighEnergyReport {
    /// `sup ⟨r−r′⟩²|K₂|`.
    pub c2: f64,
    /// `sup (r+r′)|K₃|`.
    pub c3: f64,
    /// Envelope slope of `|K₃(r,r)|` against `2r` on `[10, 100]`.
    pub k3_diagonal_slope: f64,
    /// Envelope slope of `sup |K₂|` against `⟨r−r′⟩` on `[2, 50]`.
    pub k2_offdiagonal_slope: f64,
    pub sup_k: f64,
}

pub fn verify_high_energy_bounds(d: &KernelDecomposition) -> Result<HighEnergyReport> {
    if d.support != Support::High {
        return Err(Error::Unsupported(
            "high-energy bounds need a multiplier vanishing on k < 1".into(),
        ));
    }
    let r = &d.r;
    let mut c2 = 0.0_f64;
    let mut c3 = 0.0_f64;
    for (a, b) in pairs(r) {
        if excluded(r[a], r[b], d.mesh) {
            continue;
        }
        let x = r[a] - r[b];
        c2 = c2.max((1.0 + x * x) * d.k2[[a, b]].abs());
        c3 = c3.max((r[a] + r[b]) * d.k3[[a, b]].abs());
    }
    let diag = (0..r.len()).map(|a| (2.0 * r[a], d.k3[[a, a]].abs()));
    let k3_diagonal_slope = envelope_slope(diag, 10.0, 100.0);
    let off = pairs(r)
        .filter(|&(a, b)| !excluded(r[a], r[b], d.mesh))
        .map(|(a, b)| {
            let x = r[a] - r[b];
            ((1.0 + x * x).sqrt(), d.k2[[a, b]].abs())
        });
    let k2_offdiagonal_slope = envelope_slope(off, 2.0, 50.0);
    Ok(HighEnergyReport {
        c2,
        c3,
        k3_diagonal_slope,
        k2_offdiagonal_slope,
        sup_k: sup_abs(&d.k),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockConstant {
    pub j: i32,
    /// `sup |∂ᵣK_j^{(+,+)}| / min(2^{2j}, |r−r′|^{−3}2^{−j})`.
    pub constant: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LowEnergyReport {
    pub resonant: bool,
    /// `sup |K₁| / sup |K|`.
    pub k1_ratio: f64,
    /// `sup |r−r′|·|K₂|`.
    pub c_k2: f64,
    /// `sup |r−r′|²·|∂ᵣK₂|`.
    pub c_dr_k2: f64,
    /// Envelope slope of `sup |∂ᵣK₂|` against `|r−r′|` over the decade.
    pub dr_k2_slope: f64,
    pub decade: (f64, f64),
    pub blocks: Vec<BlockConstant>,
    /// Largest per-block constant.
    pub block_constant: f64,
    /// Least-squares slope of `log₂ C_j` against `j`.
    pub block_growth: f64,
    pub sup_k: f64,
}

/// Low-energy bounds on the table rows. `decade_start` fixes the fitting
/// window `[d, 10d]` for the `|r−r′|^{−2}` envelope of `∂ᵣK₂`.
pub fn verify_low_energy_bounds(
    t: &KernelTables,
    d: &KernelDecomposition,
    mu: &Multiplier,
    blocks: std::ops::RangeInclusive<i32>,
    decade_start: f64,
) -> Result<LowEnergyReport> {
    if d.support != Support::Low {
        return Err(Error::Unsupported(
            "low-energy bounds need a multiplier vanishing on k > 1".into(),
        ));
    }
    let r = &d.r;
    let usable = |a: usize, b: usize| !excluded(r[a], r[b], d.mesh);
    let mut c_k2 = 0.0_f64;
    for (a, b) in pairs(r).filter(|&(a, b)| usable(a, b)) {
        c_k2 = c_k2.max((r[a] - r[b]).abs() * d.k2[[a, b]].abs());
    }
    let dr = dr_k2(t, mu)?;
    let mut c_dr_k2 = 0.0_f64;
    for (a, b) in pairs(r).filter(|&(a, b)| usable(a, b)) {
        let x = r[a] - r[b];
        c_dr_k2 = c_dr_k2.max(x * x * dr[[a, b]].abs());
    }
    let decade = (decade_start, 10.0 * decade_start);
    let pts = pairs(r)
        .filter(|&(a, b)| usable(a, b))
        .map(|(a, b)| ((r[a] - r[b]).abs(), dr[[a, b]].abs()));
    let dr_k2_slope = envelope_slope(pts, decade.0, decade.1);

    let mut out = Vec::new();
    for j in blocks {
        let dj = dr_block_kernel(t, mu, j)?;
        let scale = 2f64.powi(j);
        let mut c = 0.0_f64;
        for (a, b) in pairs(r).filter(|&(a, b)| usable(a, b)) {
            let x = (r[a] - r[b]).abs();
            let env = (scale * scale).min(x.powi(-3) / scale);
            c = c.max(dj[[a, b]] / env);
        }
        out.push(BlockConstant { j, constant: c });
    }
    let block_constant = out.iter().map(|b| b.constant).fold(0.0, f64::max);
    let js: Vec<f64> = out.iter().map(|b| b.j as f64).collect();
    let logs: Vec<f64> = out.iter().map(|b| b.constant.log2()).collect();
    let block_growth = if js.len() >= 2 {
        fit_slope(&js, &logs)
    } else {
        0.0
    };
    let sup_k = sup_abs(&d.k);
    Ok(LowEnergyReport {
        resonant: d.resonant,
        k1_ratio: sup_abs(&d.k1) / sup_k.max(f64::MIN_POSITIVE),
        c_k2,
        c_dr_k2,
        dr_k2_slope,
        decade,
        blocks: out,
        block_constant,
        block_growth,
        sup_k,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HormanderReport {
    pub pairs: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    pub sup: f64,
}

/// `∫_{|r′−r₁| > 2|r₁−r₂|} |K₂(r₁,r′) − K₂(r₂,r′)| dr′` for each pair of table
/// rows, with trapezoid weights over the table rows.
pub fn hormander_scan(
    t: &KernelTables,
    mu: &Multiplier,
    pairs: &[(usize, usize)],
) -> Result<HormanderReport> {
    let mut rows: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    rows.sort_unstable();
    rows.dedup();
    let k2: Array2<f64> = k2_rows(t, mu, &rows)?;
    let at = |i: usize| rows.binary_search(&i).expect("row present");
    let r = t.r();
    let n = r.len();
    let w: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { r[i] - r[i - 1] } else { 0.0 };
            let right = if i + 1 < n { r[i + 1] - r[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    let mut values = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        let (r1, r2) = (r[a], r[b]);
        if a == b {
            values.push(0.0);
            continue;
        }
        let (ia, ib) = (at(a), at(b));
        let radius = 2.0 * (r1 - r2).abs();
        let v: f64 = (0..n)
            .filter(|&q| (r[q] - r1).abs() > radius)
            .map(|q| w[q] * (k2[[ia, q]] - k2[[ib, q]]).abs())
            .sum();
        values.push(v);
    }
    let sup = values.iter().copied().fold(0.0, f64::max);
    Ok(HormanderReport {
        pairs: pairs.iter().map(|&(a, b)| (r[a], r[b])).collect(),
        values,
        sup,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_of_power_law_with_zeros() {
        // |cos(x)|/x has envelope slope −1 despite its zeros
        let pts = (1..20000).map(|i| {
            let x = 10.0 + i as f64 * 0.0045;
            (x, (3.0 * x).cos().abs() / x)
        });
        let s = envelope_slope(pts, 10.0, 100.0);
        assert!((s + 1.0).abs() < 0.02, "{s}");
    }
}

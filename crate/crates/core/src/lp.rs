//! Weighted `L^p` norms, power weights, operator-norm lower bounds and the
//! Littlewood-Paley square function.

use std::ops::RangeInclusive;

use ndarray::{Array2, Axis};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::jost::BoundStateSet;
use crate::multiplier::Multiplier;
use crate::numerics::{loglog_slope, DyadicPartition, RadialGrid};
use crate::pipeline::{GridParams, Pipeline};
use crate::potentials::PotentialSpec;
use crate::spectral::{project_continuous, Eigenbasis, SpectralOptions};
use crate::{Error, Result};

/// Exponents of the window experiment; they bracket both `3/2` and `3`.
pub const DEFAULT_P_GRID: [f64; 9] = [1.2, 1.4, 1.6, 1.8, 2.0, 2.5, 2.8, 3.2, 4.0];
/// Values of `r_max` used as refinement levels.
pub const WINDOW_LEVELS: [f64; 3] = [50.0, 100.0, 200.0];
pub const WINDOW_SEEDS: usize = 16;
/// Lower bounds growing like `r_max^γ` with `γ` at least this are growing.
pub const GROWTH_THRESHOLD: f64 = 0.1;
/// Random superpositions added to every test family.
pub const FAMILY_MIXTURES: usize = 32;

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::arg("p", format!("need 1 < p < ∞, got {p}")))
    }
}

/// Lebesgue exponent `p` with the power weight `ω(r) = r^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub p: f64,
    pub s: f64,
}

impl WeightSpec {
    pub fn new(p: f64, s: f64) -> Result<Self> {
        check_p(p)?;
        if !s.is_finite() {
            return Err(Error::arg("s", format!("weight exponent must be finite, got {s}")));
        }
        Ok(Self { p, s })
    }

    /// `ω(r) = r^{2−p}`, the weight carried by lifted radial functions.
    pub fn radial(p: f64) -> Result<Self> {
        Self::new(p, 2.0 - p)
    }

    pub fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// `‖r^s f‖_{L^p(0, r_max)}` with the grid's quadrature weights. For `s < 0`
/// the value at the origin is ignored as for a function vanishing there.
pub fn lp_norm(f: &[f64], p: f64, grid: &RadialGrid, s: f64) -> Result<f64> {
    check_p(p)?;
    if f.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a radial grid of {} nodes",
            f.len(),
            grid.len()
        )));
    }
    let sp = s * p;
    let mut acc = 0.0;
    for ((r, w), v) in grid.nodes().iter().zip(grid.weights()).zip(f) {
        let a = v.abs();
        if a == 0.0 {
            continue;
        }
        if *r == 0.0 {
            // Dirichlet functions vanish at the origin; the node contributes
            // the limit of r^{sp}|f|^p, which is zero for s > −1
            if sp == 0.0 {
                acc += w * a.powf(p);
            } else if sp < 0.0 && s <= -1.0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        acc += w * r.powf(sp) * a.powf(p);
    }
    Ok(acc.powf(1.0 / p))
}

/// `‖f‖_{L^p(ℝ³)}` of a radial profile `f(r)`.
pub fn radial_lp_norm(f: &[f64], p: f64, grid: &RadialGrid) -> Result<f64> {
    check_p(p)?;
    let g: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(f)
        .map(|(r, v)| 4.0 * std::f64::consts::PI * r * r * v.abs().powf(p))
        .collect();
    Ok(grid.integrate(&g).powf(1.0 / p))
}

/// Outcome of an `A_p` average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApStatus {
    Bounded,
    /// An average of `r^{−1}` over an interval touching the origin.
    Logarithmic,
    Divergent,
}

fn exponent_status(cmp: std::cmp::Ordering) -> ApStatus {
    match cmp {
        std::cmp::Ordering::Greater => ApStatus::Bounded,
        std::cmp::Ordering::Equal => ApStatus::Logarithmic,
        std::cmp::Ordering::Less => ApStatus::Divergent,
    }
}

/// Average of `r^σ` over `[a, b]`, finite by assumption.
fn power_average(sigma: f64, a: f64, b: f64) -> f64 {
    let e = sigma + 1.0;
    if a == 0.0 {
        return b.powf(sigma) / e;
    }
    let d = (b - a) / a;
    let l = d.ln_1p();
    let m = if e == 0.0 { l / d } else { (e * l).exp_m1() / (e * d) };
    a.powf(sigma) * m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApRatio {
    pub a: f64,
    pub b: f64,
    /// Infinite unless the status is bounded.
    pub value: f64,
    pub status: ApStatus,
}

/// `(⨍ω)·(⨍ω^{−p′/p})^{p/p′}` on `[a, b]` for `ω = r^s`.
pub fn ap_ratio(s: f64, p: f64, a: f64, b: f64) -> Result<ApRatio> {
    check_p(p)?;
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(Error::arg("interval", format!("need 0 ≤ a < b, got [{a}, {b}]")));
    }
    // the second exponent is −s/(p−1); compare s with p−1 instead of dividing
    let status = if a == 0.0 {
        let first = exponent_status(s.total_cmp(&-1.0));
        let second = exponent_status((p - 1.0).total_cmp(&s));
        first.max(second)
    } else {
        ApStatus::Bounded
    };
    let value = if status == ApStatus::Bounded {
        power_average(s, a, b) * power_average(-s / (p - 1.0), a, b).powf(p - 1.0)
    } else {
        f64::INFINITY
    };
    Ok(ApRatio { a, b, value, status })
}

/// Intervals `[0, b]` for `b ∈ [1e-2, 1e2]` and translates `[a, a(1+δ)]`.
pub fn standard_ap_family() -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = (0..=40).map(|i| (0.0, 10f64.powf(-2.0 + 0.1 * i as f64))).collect();
    for i in 0..=16 {
        let a = 10f64.powf(-2.0 + 0.25 * i as f64);
        for delta in [1e-3, 1e-1, 1.0, 10.0, 100.0] {
            out.push((a, a * (1.0 + delta)));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApScan {
    pub p: f64,
    pub s: f64,
    /// Infinite when any member diverges.
    pub sup: f64,
    pub status: ApStatus,
    pub divergent: bool,
    pub ratios: Vec<ApRatio>,
}

/// Supremum of [`ap_ratio`] over `family` for `ω = r^{2−p}`.
pub fn ap_scan(p: f64, family: &[(f64, f64)]) -> Result<ApScan> {
    let w = WeightSpec::radial(p)?;
    let ratios = family
        .iter()
        .map(|&(a, b)| ap_ratio(w.s, p, a, b))
        .collect::<Result<Vec<_>>>()?;
    let status = ratios.iter().map(|r| r.status).max().unwrap_or(ApStatus::Bounded);
    let sup = ratios.iter().map(|r| r.value).fold(0.0, f64::max);
    Ok(ApScan {
        p,
        s: w.s,
        sup,
        status,
        divergent: status != ApStatus::Bounded,
        ratios,
    })
}

/// A named member of a test family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestInput {
    pub id: String,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OpNormEstimate {
    pub p: f64,
    pub s: f64,
    pub bound: f64,
    pub maximizer: String,
}

/// Largest `‖r^s·Tf‖_p / ‖r^s·f‖_p` over paired inputs and outputs.
pub fn opnorm_from_outputs(
    family: &[TestInput],
    outputs: &[Vec<f64>],
    p: f64,
    s: f64,
    grid: &RadialGrid,
) -> Result<OpNormEstimate> {
    if family.is_empty() {
        return Err(Error::arg("family", "empty test family"));
    }
    if outputs.len() != family.len() {
        return Err(Error::arg(
            "apply",
            format!("{} outputs for {} inputs", outputs.len(), family.len()),
        ));
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, (f, tf)) in family.iter().zip(outputs).enumerate() {
        let den = lp_norm(&f.samples, p, grid, s)?;
        if !(den > 0.0 && den.is_finite()) {
            return Err(Error::arg("family", format!("member {} has weighted norm {den}", f.id)));
        }
        let ratio = lp_norm(tf, p, grid, s)? / den;
        if ratio > best.0 {
            best = (ratio, i);
        }
    }
    Ok(OpNormEstimate {
        p,
        s,
        bound: best.0,
        maximizer: family[best.1].id.clone(),
    })
}

/// Lower bound on the `p → p` norm of `T` in the weighted norm `‖r^s·‖_p`.
pub fn estimate_opnorm(
    apply: impl FnOnce(&[Vec<f64>]) -> Result<Vec<Vec<f64>>>,
    p: f64,
    s: f64,
    grid: &RadialGrid,
    family: &[TestInput],
) -> Result<OpNormEstimate> {
    let inputs: Vec<Vec<f64>> = family.iter().map(|f| f.samples.clone()).collect();
    let outputs = apply(&inputs)?;
    opnorm_from_outputs(family, &outputs, p, s, grid)
}

/// Smallest Gaussian width of a family member relative to `1/k_max`: the
/// members' spectra are negligible at the sharp top of the spectral window.
const BAND_LIMIT: f64 = 8.0;

/// Odd Gaussian pair `e^{−(r−c)²/2σ²} − e^{−(r+c)²/2σ²}`.
fn odd_gaussian(r: f64, c: f64, sigma: f64) -> f64 {
    let q = 0.5 / (sigma * sigma);
    (-q * (r - c) * (r - c)).exp() - (-q * (r + c) * (r + c)).exp()
}

/// Dyadic bumps at `r ≈ 2^i`, wave packets at frequencies `2^j`, bumps at
/// fixed fractions of `r_max` and [`FAMILY_MIXTURES`] random superpositions.
///
/// Members are odd Gaussians with width at least `BAND_LIMIT/k_max`, so they
/// vanish at the origin, are negligible at `r_max` and are band limited.
pub fn test_family(grid: &RadialGrid, k_max: f64, seed: u64) -> Vec<TestInput> {
    with_mixtures(base_members(grid.nodes(), grid.r_max(), k_max), seed)
}

/// [`test_family`] whose base members are the union of the designs for every
/// level up to the grid's `r_max`. Mixture coefficients depend only on the
/// member, so a mixture at a larger level extends the same mixture at a
/// smaller one.
pub fn nested_family(grid: &RadialGrid, k_max: f64, levels: &[f64], seed: u64) -> Vec<TestInput> {
    let mut base: Vec<TestInput> = Vec::new();
    let top = grid.r_max() * (1.0 + 1e-12);
    for &level in levels.iter().filter(|l| **l <= top) {
        for m in base_members(grid.nodes(), level, k_max) {
            if !base.iter().any(|o| o.id == m.id) {
                base.push(m);
            }
        }
    }
    with_mixtures(base, seed)
}

fn base_members(r: &[f64], r_max: f64, k_max: f64) -> Vec<TestInput> {
    let min_sigma = BAND_LIMIT / k_max;
    let sample = |f: &dyn Fn(f64) -> f64| r.iter().map(|&x| f(x)).collect::<Vec<f64>>();
    let mut out = Vec::new();
    let mut i = -2;
    loop {
        let c = 2f64.powi(i);
        let sigma = (0.25 * c).max(min_sigma);
        if c + 8.0 * sigma > r_max {
            break;
        }
        out.push(TestInput {
            id: format!("bump:{i}"),
            samples: sample(&|x| odd_gaussian(x, c, sigma)),
        });
        i += 1;
    }
    let c = (0.25 * r_max).min(8.0);
    for j in -1..=3 {
        let freq = 2f64.powi(j);
        if freq + BAND_LIMIT / (0.25 * c) > k_max {
            continue;
        }
        out.push(TestInput {
            id: format!("packet:{j}"),
            samples: sample(&|x| odd_gaussian(x, c, 0.25 * c) * (freq * x).cos()),
        });
    }
    for t in [0.2, 0.4, 0.6, 0.8] {
        let c = t * r_max;
        let sigma = (0.025 * r_max).clamp(min_sigma, 1.5);
        out.push(TestInput {
            id: format!("translate:{c}"),
            samples: sample(&|x| odd_gaussian(x, c, sigma)),
        });
    }
    out
}

/// 64-bit FNV-1a, stable across platforms and toolchains.
fn fnv1a(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Appends [`FAMILY_MIXTURES`] superpositions with coefficients uniform in
/// `[−1, 1]`, drawn from a stream keyed by the seed and the member id.
fn with_mixtures(mut base: Vec<TestInput>, seed: u64) -> Vec<TestInput> {
    let nr = base.first().map_or(0, |b| b.samples.len());
    let mut mixes = vec![vec![0.0; nr]; FAMILY_MIXTURES];
    for member in &base {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&member.id));
        for mix in mixes.iter_mut() {
            let a = 2.0 * rng.random::<f64>() - 1.0;
            for (s, v) in mix.iter_mut().zip(&member.samples) {
                *s += a * v;
            }
        }
    }
    for (m, samples) in mixes.into_iter().enumerate() {
        base.push(TestInput {
            id: format!("mix:{m:02}"),
            samples,
        });
    }
    base
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquareFunctionResult {
    pub j_range: (i32, i32),
    /// `blocks[i]` is block `j_range.0 + i` applied to `P_c f`.
    pub blocks: Vec<Vec<f64>>,
    /// `(Σ_j |block_j|²)^{1/2}`.
    pub sf: Vec<f64>,
}

/// Littlewood-Paley pieces `ψ(2^{−j}√H)f` and their pointwise `ℓ²` sum.
pub fn square_function(
    basis: &Eigenbasis,
    bound: &BoundStateSet,
    grid: &RadialGrid,
    partition: &DyadicPartition,
    f: &[f64],
    j_range: RangeInclusive<i32>,
) -> Result<SquareFunctionResult> {
    let (lo, hi) = (*j_range.start(), *j_range.end());
    if lo > hi || lo < partition.j_min || hi > partition.j_max {
        return Err(Error::arg(
            "j_range",
            format!(
                "[{lo}, {hi}] not inside the window [{}, {}]",
                partition.j_min, partition.j_max
            ),
        ));
    }
    if f.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a radial grid of {} nodes",
            f.len(),
            grid.len()
        )));
    }
    let fc = project_continuous(bound, grid, f);
    let g = basis.forward_reduced(&fc)?;
    let ks = basis.k();
    let nb = (hi - lo + 1) as usize;
    let mut gs = Array2::<f64>::zeros((ks.len(), nb));
    for (i, mut row) in gs.axis_iter_mut(Axis(0)).enumerate() {
        for (c, j) in (lo..=hi).enumerate() {
            row[c] = g[i] * partition.block(j, ks[i]);
        }
    }
    let out = basis.inverse_batch(gs.view());
    let blocks: Vec<Vec<f64>> = out.columns().into_iter().map(|c| c.to_vec()).collect();
    let sf = (0..grid.len())
        .map(|i| blocks.iter().map(|b| b[i] * b[i]).sum::<f64>().sqrt())
        .collect();
    Ok(SquareFunctionResult {
        j_range: (lo, hi),
        blocks,
        sf,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Stable,
    Growing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowConfig {
    pub potential: PotentialSpec,
    /// Grid at the finest level; coarser levels keep its mesh.
    pub reference: GridParams,
    pub levels: Vec<f64>,
    pub ps: Vec<f64>,
    pub seeds: usize,
    pub seed: u64,
}

impl WindowConfig {
    pub fn new(potential: PotentialSpec, seed: u64) -> Self {
        Self {
            potential,
            reference: GridParams::REFERENCE,
            levels: WINDOW_LEVELS.to_vec(),
            ps: DEFAULT_P_GRID.to_vec(),
            seeds: WINDOW_SEEDS,
            seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowRow {
    pub p: f64,
    pub level: f64,
    pub bound: f64,
    pub maximizer_id: String,
    /// Index of the worst sign pattern.
    pub pattern: usize,
    pub classification: Trend,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowTrend {
    pub p: f64,
    pub bounds: Vec<f64>,
    /// Log-log slope of the bound against `r_max`.
    pub growth: f64,
    pub classification: Trend,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowReport {
    pub rows: Vec<WindowRow>,
    pub trends: Vec<WindowTrend>,
}

/// Sign patterns for blocks `j_max, j_max − 1, …` drawn in that order, so a
/// pattern restricted to a narrower window is the same pattern.
fn sign_patterns(seed: u64, count: usize, j_max: i32, j_lowest: i32) -> Vec<Vec<(i32, f64)>> {
    (0..count)
        .map(|n| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(n as u64 + 1);
            (j_lowest..=j_max)
                .rev()
                .map(|j| (j, if rng.random::<bool>() { 1.0 } else { -1.0 }))
                .collect()
        })
        .collect()
}

fn pattern_multiplier(partition: DyadicPartition, pattern: &[(i32, f64)]) -> Multiplier {
    let signs = partition
        .blocks()
        .map(|j| pattern.iter().find(|q| q.0 == j).map_or(1.0, |q| q.1))
        .collect();
    Multiplier::RandomSign { partition, signs }
}

/// Worst case over sign patterns of the opnorm lower bound, per `p`.
fn window_level(
    pipe: &Pipeline,
    patterns: &[Vec<(i32, f64)>],
    ps: &[f64],
    levels: &[f64],
    seed: u64,
) -> Result<Vec<(OpNormEstimate, usize)>> {
    let family = nested_family(&pipe.grid, pipe.spectral.k_max(), levels, seed);
    let nr = pipe.grid.len();
    let m = family.len();
    let mut a = Array2::<f64>::zeros((nr, m));
    for (c, f) in family.iter().enumerate() {
        let fc = project_continuous(&pipe.bound, &pipe.grid, &f.samples);
        a.column_mut(c).assign(&ndarray::ArrayView1::from(&fc));
    }
    let g = pipe.basis.forward_batch(a.view());
    let ks = pipe.basis.k();
    let mut gs = Array2::<f64>::zeros((ks.len(), m * patterns.len()));
    for (q, pat) in patterns.iter().enumerate() {
        let mu = pattern_multiplier(pipe.partition(), pat);
        for (i, k) in ks.iter().enumerate() {
            let v = mu.value(*k);
            for c in 0..m {
                gs[[i, q * m + c]] = v * g[[i, c]];
            }
        }
    }
    drop(g);
    let out = pipe.basis.inverse_batch(gs.view());
    drop(gs);
    let outputs: Vec<Vec<Vec<f64>>> = (0..patterns.len())
        .map(|q| (0..m).map(|c| out.column(q * m + c).to_vec()).collect())
        .collect();
    ps.iter()
        .map(|&p| {
            let s = 2.0 / p - 1.0;
            let mut worst: Option<(OpNormEstimate, usize)> = None;
            for (q, o) in outputs.iter().enumerate() {
                let e = opnorm_from_outputs(&family, o, p, s, &pipe.grid)?;
                if worst.as_ref().is_none_or(|w| e.bound > w.0.bound) {
                    worst = Some((e, q));
                }
            }
            worst.ok_or_else(|| Error::arg("seeds", "need at least one sign pattern"))
        })
        .collect()
}

/// Random-sign Littlewood-Paley multipliers at several `r_max`, measured in
/// the weighted norms `‖r^{2/p−1}·‖_p`, and the trend of the lower bounds.
pub fn lp_window_experiment(cfg: &WindowConfig, opts: SpectralOptions) -> Result<WindowReport> {
    for &p in &cfg.ps {
        check_p(p)?;
    }
    if cfg.levels.len() < 2 {
        return Err(Error::arg("levels", "need at least two refinement levels"));
    }
    if cfg.seeds == 0 {
        return Err(Error::arg("seeds", "need at least one sign pattern"));
    }
    let grids: Vec<GridParams> = cfg.levels.iter().map(|&l| cfg.reference.rescaled(l)).collect();
    let j_lowest = grids.iter().map(|g| g.j_min).min().unwrap_or(cfg.reference.j_min);
    let patterns = sign_patterns(cfg.seed, cfg.seeds, cfg.reference.j_max, j_lowest);
    let mut per_level = Vec::new();
    for params in &grids {
        let pipe = Pipeline::build(&cfg.potential, *params, opts)?;
        log::info!("window level r_max = {}: n = {}, j_min = {}", params.r_max, params.n, params.j_min);
        per_level.push(window_level(&pipe, &patterns, &cfg.ps, &cfg.levels, cfg.seed)?);
    }
    let mut rows = Vec::new();
    let mut trends = Vec::new();
    for (ip, &p) in cfg.ps.iter().enumerate() {
        let bounds: Vec<f64> = per_level.iter().map(|l| l[ip].0.bound).collect();
        let growth = loglog_slope(&cfg.levels, &bounds);
        let classification = if growth >= GROWTH_THRESHOLD {
            Trend::Growing
        } else {
            Trend::Stable
        };
        for (level, l) in cfg.levels.iter().zip(&per_level) {
            rows.push(WindowRow {
                p,
                level: *level,
                bound: l[ip].0.bound,
                maximizer_id: l[ip].0.maximizer.clone(),
                pattern: l[ip].1,
                classification,
            });
        }
        trends.push(WindowTrend {
            p,
            bounds,
            growth,
            classification,
        });
    }
    Ok(WindowReport { rows, trends })
}

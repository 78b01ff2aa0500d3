use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Points per Gauss-Legendre panel on the spectral axis.
pub const GL_ORDER: usize = 8;

/// Geometric growth ratio of graded spacings near the origin.
const GRADING_RATIO: f64 = 1.05;
/// Smallest graded spacing as a fraction of the bulk spacing.
const GRADING_DEPTH: f64 = 20.0;
/// Panels per octave on the spectral axis, so each dyadic bump is resolved
/// even when the oscillation bound alone would allow wider panels.
const MIN_PANELS_PER_OCTAVE: usize = 4;
/// Panels are shrunk below the spacing bound so the phase `e^{2ik r_max}`
/// is integrated to ~1e-10 per panel.
const PANEL_SAFETY: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grading {
    Uniform,
    GradedAtZero,
}

/// Serializable description of a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGridSpec {
    pub r_max: f64,
    pub n: usize,
    pub grading: Grading,
}

/// Serializable description of a spectral grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectralGridSpec {
    pub j_min: i32,
    pub j_max: i32,
}

/// Nodes and weights on `[0, r_max]`.
///
/// Uniform grids carry the fourth-order Gregory end corrections, so interior
/// weights equal the trapezoid spacing while cubics integrate exactly.
/// Graded grids integrate the local cubic interpolant on every interval.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    spec: RadialGridSpec,
    mesh: f64,
}

impl RadialGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights for integrands that vanish at the origin and extend evenly
    /// across it, such as products of two Dirichlet functions. On uniform
    /// grids the origin end is plain trapezoid: the end corrections would
    /// only add an `O((kh)⁴)` error for oscillatory products.
    pub fn origin_even_weights(&self) -> Vec<f64> {
        let mut w = self.weights.clone();
        if self.is_uniform() && w.len() > 6 {
            let h = self.nodes[1] - self.nodes[0];
            w[0] = 0.5 * h;
            w[1] = h;
            w[2] = h;
        }
        w
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.spec.r_max
    }

    /// Largest node spacing.
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn spec(&self) -> RadialGridSpec {
        self.spec
    }

    pub fn is_uniform(&self) -> bool {
        self.spec.grading == Grading::Uniform
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Real `L²(0, r_max)` inner product.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    pub fn l2_norm(&self, values: &[f64]) -> f64 {
        self.inner(values, values).sqrt()
    }

    /// Index of the node closest to `r`.
    pub fn nearest(&self, r: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&r).expect("finite nodes"))
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.nodes.len() => self.nodes.len() - 1,
            Err(i) => {
                if r - self.nodes[i - 1] <= self.nodes[i] - r {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }
}

pub fn build_radial_grid(r_max: f64, n: usize, grading: Grading) -> Result<RadialGrid> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "r_max must be positive and finite, got {r_max}"
        )));
    }
    if n < 16 {
        return Err(Error::InvalidGrid(format!(
            "radial grid needs at least 16 nodes, got {n}"
        )));
    }
    let spec = RadialGridSpec { r_max, n, grading };
    let (nodes, weights) = match grading {
        Grading::Uniform => {
            let h = r_max / (n - 1) as f64;
            let mut nodes: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
            nodes[n - 1] = r_max;
            (nodes, gregory_weights(n, h))
        }
        Grading::GradedAtZero => {
            let nodes = graded_nodes(r_max, n);
            let weights = local_cubic_weights(&nodes);
            (nodes, weights)
        }
    };
    let mesh = nodes
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0_f64, f64::max);
    Ok(RadialGrid {
        nodes,
        weights,
        spec,
        mesh,
    })
}

fn gregory_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    for (i, c) in [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0].into_iter().enumerate() {
        w[i] = c * h;
        w[n - 1 - i] = c * h;
    }
    w
}

fn graded_nodes(r_max: f64, n: usize) -> Vec<f64> {
    let steps = n - 1;
    let graded = ((GRADING_DEPTH.ln() / GRADING_RATIO.ln()).ceil() as usize).min(steps / 2);
    let shrink: Vec<f64> = (0..graded)
        .map(|i| GRADING_RATIO.powi(-((graded - i) as i32)))
        .collect();
    let bulk = r_max / ((steps - graded) as f64 + shrink.iter().sum::<f64>());
    let mut nodes = Vec::with_capacity(n);
    let mut r = 0.0;
    nodes.push(r);
    for s in &shrink {
        r += bulk * s;
        nodes.push(r);
    }
    for _ in graded..steps {
        r += bulk;
        nodes.push(r);
    }
    nodes[n - 1] = r_max;
    nodes
}

/// Weights from integrating, on each interval, the cubic through the four
/// nearest nodes. The cubic is integrated with two-point Gauss-Legendre.
fn local_cubic_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    let g = 0.5 / 3f64.sqrt();
    for i in 0..n - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let start = i.saturating_sub(1).min(n - 4);
        let stencil = &nodes[start..start + 4];
        for t in [0.5 - g, 0.5 + g] {
            let x = a + t * (b - a);
            for (j, &xj) in stencil.iter().enumerate() {
                let mut l = 1.0;
                for (m, &xm) in stencil.iter().enumerate() {
                    if m != j {
                        l *= (x - xm) / (xj - xm);
                    }
                }
                w[start + j] += 0.5 * (b - a) * l;
            }
        }
    }
    w
}

/// Gauss-Legendre panels on `[0, k_max]` with dyadic breakpoints.
///
/// Block `j` of the dyadic partition lives on `[2^{j-1}, 2^{j+1}]`. The grid
/// starts at `k = 0` so that the cumulative low block (and with it the whole
/// continuous spectrum below `k_max`) is integrated; `k_min = 2^{j_min-1}`
/// marks the bottom of the finest genuine block.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    j_min: i32,
    j_max: i32,
    r_max: f64,
    panel_edges: Vec<f64>,
}

impl SpectralGrid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn k_min(&self) -> f64 {
        2f64.powi(self.j_min - 1)
    }

    pub fn k_max(&self) -> f64 {
        2f64.powi(self.j_max + 1)
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn spec(&self) -> SpectralGridSpec {
        SpectralGridSpec {
            j_min: self.j_min,
            j_max: self.j_max,
        }
    }

    pub fn panel_edges(&self) -> &[f64] {
        &self.panel_edges
    }

    /// Largest gap between consecutive nodes, including the gap from 0.
    pub fn max_spacing(&self) -> f64 {
        let mut gap = self.nodes[0];
        for w in self.nodes.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        gap
    }

    /// Range of node indices with `lo <= k <= hi`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.nodes.partition_point(|&k| k < lo);
        let b = self.nodes.partition_point(|&k| k <= hi);
        a..b.max(a)
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
pub(crate) fn unit_gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = GaussLegendre::new(NonZeroUsize::new(GL_ORDER).expect("nonzero order"));
        let mut pairs: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs
    })
}

pub fn build_spectral_grid(j_min: i32, j_max: i32, r_max: f64) -> Result<SpectralGrid> {
    if j_min > j_max {
        return Err(Error::InvalidGrid(format!(
            "inverted dyadic range: j_min={j_min} > j_max={j_max}"
        )));
    }
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "r_max must be positive and finite, got {r_max}"
        )));
    }
    let rule = unit_gauss_legendre();
    let mut gap_fraction = 2.0 * rule[0].0;
    for w in rule.windows(2) {
        gap_fraction = gap_fraction.max(w[1].0 - w[0].0);
    }
    let spacing = PI / (4.0 * r_max);
    let width = PANEL_SAFETY * spacing / gap_fraction;

    let mut breaks = vec![0.0];
    for j in (j_min - 1)..=(j_max + 1) {
        breaks.push(2f64.powi(j));
    }

    let mut edges = vec![0.0];
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let panels = (((b - a) / width).ceil() as usize).max(MIN_PANELS_PER_OCTAVE);
        let step = (b - a) / panels as f64;
        for p in 1..=panels {
            edges.push(if p == panels { b } else { a + p as f64 * step });
        }
    }

    let mut nodes = Vec::with_capacity((edges.len() - 1) * GL_ORDER);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for e in edges.windows(2) {
        let len = e[1] - e[0];
        for &(x, w) in rule {
            nodes.push(e[0] + len * x);
            weights.push(len * w);
        }
    }
    Ok(SpectralGrid {
        nodes,
        weights,
        j_min,
        j_max,
        r_max,
        panel_edges: edges,
    })
}

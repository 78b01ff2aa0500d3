//! Acceptance checks at the configured resolution, shared by `halfline
//! verify` and the test harness.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Suite};
use crate::jost::JostSolver;
use crate::lp::{ap_scan, lp_norm, lp_window_experiment, square_function, standard_ap_family, Trend};
use crate::multiplier::{
    build_kernel_tables, decompose_kernel, hormander_scan, verify_high_energy_bounds,
    verify_low_energy_bounds, KernelTables, Multiplier, BLOCK_GROWTH_TOL,
};
use crate::numerics::{build_radial_grid, radical_inverse, BumpFunction, DyadicPartition, Grading};
use crate::pipeline::{GridParams, Pipeline};
use crate::potentials::{PotentialModel, PotentialSpec};
use crate::{Error, Result};

pub const CRITERIA: [&str; 12] = [
    "free-case oracle",
    "wronskian identity",
    "determinant identity",
    "resonance detection",
    "parseval on the continuous subspace",
    "high-energy kernel bounds",
    "low-energy kernel bounds",
    "A_p window",
    "multiplier-norm window trend",
    "square-function L2 equivalence",
    "functional calculus",
    "determinism",
];

pub const FREE_ONLY: [u32; 3] = [1, 8, 12];

/// Exponents whose window classification is checked.
const STABLE_P: [f64; 3] = [1.8, 2.0, 2.5];
const GROWING_P: [f64; 2] = [1.2, 4.0];
const SQFN_P: [f64; 2] = [1.8, 2.5];
const BOUNDED_AP: [f64; 4] = [1.6, 2.0, 2.25, 2.8];
const DIVERGENT_AP: [f64; 4] = [1.5, 1.4, 3.0, 3.25];
const RANDOM_INPUTS: usize = 5;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub target: String,
    pub pass: bool,
}

fn at_most(name: &str, value: f64, limit: f64) -> Metric {
    Metric {
        name: name.into(),
        value,
        target: format!("<= {limit:e}"),
        pass: value <= limit,
    }
}

fn at_least(name: &str, value: f64, limit: f64) -> Metric {
    Metric {
        name: name.into(),
        value,
        target: format!(">= {limit}"),
        pass: value >= limit,
    }
}

fn within(name: &str, value: f64, center: f64, tol: f64) -> Metric {
    Metric {
        name: name.into(),
        value,
        target: format!("{center} +- {tol}"),
        pass: (value - center).abs() <= tol,
    }
}

fn info(name: &str, value: f64) -> Metric {
    Metric {
        name: name.into(),
        value,
        target: "reported".into(),
        pass: true,
    }
}

fn flag(name: &str, ok: bool, target: &str) -> Metric {
    Metric {
        name: name.into(),
        value: if ok { 1.0 } else { 0.0 },
        target: target.into(),
        pass: ok,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub metrics: Vec<Metric>,
    pub error: Option<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let failing: Vec<&str> = self
            .metrics
            .iter()
            .filter(|m| !m.pass)
            .map(|m| m.name.as_str())
            .collect();
        let mut s = format!("{status} {:>2} {}", self.id, self.name);
        if let Some(e) = &self.error {
            s.push_str(&format!(" (error: {e})"));
        } else if !failing.is_empty() {
            s.push_str(&format!(" (failing: {})", failing.join(", ")));
        }
        s
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub results: Vec<CriterionResult>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn failing(&self) -> Vec<u32> {
        self.results.iter().filter(|r| !r.pass).map(|r| r.id).collect()
    }
}

fn aubin(strength: f64) -> PotentialSpec {
    PotentialSpec::Aubin { a: 1.0, strength }
}

fn odd_gaussian(r: f64, c: f64, sigma: f64) -> f64 {
    let q = 0.5 / (sigma * sigma);
    (-q * (r - c) * (r - c)).exp() - (-q * (r + c) * (r + c)).exp()
}

/// Sums of three odd Gaussians with random centres, widths and amplitudes.
pub fn random_smooth_inputs(r: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let terms: Vec<(f64, f64, f64)> = (0..3)
                .map(|_| {
                    let c = 1.0 + 14.0 * rng.random::<f64>();
                    let s = 0.5 + 2.5 * rng.random::<f64>();
                    let a = 2.0 * rng.random::<f64>() - 1.0;
                    (c, s, a)
                })
                .collect();
            r.iter()
                .map(|&x| terms.iter().map(|&(c, s, a)| a * odd_gaussian(x, c, s)).sum())
                .collect()
        })
        .collect()
}

/// Square function of the plain sine transform on a uniform grid, with the
/// trapezoid rule in `r` and on a uniform `k` grid up to `k_max`.
pub fn classical_square_function(
    r: &[f64],
    f: &[f64],
    partition: &DyadicPartition,
    k_max: f64,
) -> Vec<f64> {
    let h = r[1] - r[0];
    let r_max = r[r.len() - 1];
    let m = (k_max / (PI / (8.0 * r_max))).ceil() as usize;
    let dk = k_max / m as f64;
    let ks: Vec<f64> = (0..=m).map(|i| i as f64 * dk).collect();
    let trap = |n: usize, i: usize, step: f64| if i == 0 || i == n { 0.5 * step } else { step };
    let c = FRAC_2_PI.sqrt();
    let nr = r.len();
    let big_f: Vec<f64> = ks
        .par_iter()
        .map(|&k| {
            c * (0..nr)
                .map(|i| trap(nr - 1, i, h) * (r[i] * k).sin() * f[i])
                .sum::<f64>()
        })
        .collect();
    let js: Vec<i32> = partition.blocks().collect();
    let weighted: Vec<Vec<f64>> = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let w = c * trap(m, i, dk) * big_f[i];
            js.iter().map(|&j| if k > 0.0 { w * partition.block(j, k) } else { 0.0 }).collect()
        })
        .collect();
    r.par_iter()
        .map(|&x| {
            let mut acc = vec![0.0; js.len()];
            for (i, &k) in ks.iter().enumerate() {
                let s = (x * k).sin();
                for (a, w) in acc.iter_mut().zip(&weighted[i]) {
                    *a += s * w;
                }
            }
            acc.iter().map(|a| a * a).sum::<f64>().sqrt()
        })
        .collect()
}

/// Lazily built pipelines for the potentials the criteria use.
pub struct Lab {
    cfg: RunConfig,
    aubin: Option<Pipeline>,
    free: Option<Pipeline>,
}

impl Lab {
    pub fn new(cfg: RunConfig) -> Self {
        Self {
            cfg,
            aubin: None,
            free: None,
        }
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    fn aubin(&mut self) -> Result<&Pipeline> {
        if self.aubin.is_none() {
            self.free = None;
            self.aubin = Some(Pipeline::build(&aubin(1.0), self.cfg.grid, self.cfg.spectral)?);
        }
        Ok(self.aubin.as_ref().expect("built"))
    }

    fn free(&mut self) -> Result<&Pipeline> {
        if self.free.is_none() {
            self.aubin = None;
            self.free = Some(Pipeline::build(&PotentialSpec::Free, self.cfg.grid, self.cfg.spectral)?);
        }
        Ok(self.free.as_ref().expect("built"))
    }

    /// Drops cached eigenbases.
    pub fn release(&mut self) {
        self.aubin = None;
        self.free = None;
    }

    fn half_grid(&self) -> GridParams {
        GridParams {
            n: self.cfg.grid.n / 2,
            ..self.cfg.grid
        }
    }

    fn solver(&self, spec: &PotentialSpec, grid: GridParams) -> Result<(PotentialModel, JostSolver)> {
        let model = spec.build()?;
        let g = build_radial_grid(grid.r_max, grid.n, Grading::Uniform)?;
        let s = JostSolver::new(&model, &g, self.cfg.spectral.interpolation);
        Ok((model, s))
    }

    pub fn run(&mut self, id: u32) -> CriterionResult {
        let name = CRITERIA
            .get(id.wrapping_sub(1) as usize)
            .copied()
            .unwrap_or("unknown")
            .to_string();
        let out = match id {
            1 => self.free_oracle(),
            2 => self.wronskian(),
            3 => self.determinant(),
            4 => self.resonance(),
            5 => self.parseval(),
            6 => self.high_energy(),
            7 => self.low_energy(),
            8 => Ok(ap_window()),
            9 => self.window(),
            10 => self.square_function_l2(),
            11 => self.functional_calculus(),
            12 => self.determinism(),
            _ => Err(Error::arg("criterion", format!("no criterion {id}"))),
        };
        match out {
            Ok(metrics) => CriterionResult {
                id,
                name,
                pass: !metrics.is_empty() && metrics.iter().all(|m| m.pass),
                metrics,
                error: None,
            },
            Err(e) => CriterionResult {
                id,
                name,
                pass: false,
                metrics: Vec::new(),
                error: Some(e.to_string()),
            },
        }
    }

    fn free_oracle(&mut self) -> Result<Vec<Metric>> {
        let pipe = self.free()?;
        let (r, k) = (pipe.basis.r(), pipe.basis.k());
        let sine = (0..k.len())
            .into_par_iter()
            .map(|j| {
                (0..r.len())
                    .map(|i| (pipe.basis.etilde(i, j) - (r[i] * k[j]).sin()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        let f: Vec<f64> = r.iter().map(|x| x * (-x * x).exp()).collect();
        let back = pipe.basis.inverse_reduced(&pipe.basis.forward_reduced(&f)?)?;
        let peak = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let trip = f.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / peak;

        let inputs: Vec<Vec<f64>> = vec![
            f.clone(),
            r.iter().map(|&x| odd_gaussian(x, 4.0, 1.0)).collect(),
            r.iter().map(|&x| odd_gaussian(x, 6.0, 2.0) * (2.0 * x).cos()).collect(),
        ];
        let part = pipe.partition();
        let mut worst = 0.0_f64;
        for input in &inputs {
            let sf = square_function(&pipe.basis, &pipe.bound, &pipe.grid, &part, input, part.j_min..=part.j_max)?;
            let oracle = classical_square_function(r, input, &part, pipe.spectral.k_max());
            for p in SQFN_P {
                let s = 2.0 / p - 1.0;
                let den = lp_norm(input, p, &pipe.grid, s)?;
                let a = lp_norm(&sf.sf, p, &pipe.grid, s)? / den;
                let b = lp_norm(&oracle, p, &pipe.grid, s)? / den;
                worst = worst.max((a / b - 1.0).abs());
            }
        }
        Ok(vec![
            at_most("max |e(r,k) - sin(rk)|", sine, 1e-12),
            at_most("round trip r exp(-r^2), relative", trip, 1e-6),
            at_most("square-function ratio vs sine oracle, relative", worst, 1e-4),
        ])
    }

    fn wronskian_max(&self, grid: GridParams, ks: &[f64]) -> Result<f64> {
        let (_, solver) = self.solver(&aubin(1.0), grid)?;
        Ok(ks
            .par_iter()
            .map(|&k| {
                let col = solver.solve_m(k);
                ((col.f0() * col.f0_prime().conj()).im + k).abs()
            })
            .reduce(|| 0.0, f64::max))
    }

    fn wronskian(&mut self) -> Result<Vec<Metric>> {
        let fine = self.aubin()?.scattering.max_wronskian_defect();
        let ks = self.aubin()?.spectral.nodes().to_vec();
        let g = self.cfg.grid;
        let half = self.wronskian_max(GridParams { n: g.n / 2, ..g }, &ks)?;
        let quarter = self.wronskian_max(GridParams { n: g.n / 4, ..g }, &ks)?;
        Ok(vec![
            at_most("max wronskian defect", fine, 1e-5),
            at_least("order n/2 -> n", (half / fine).log2(), 1.8),
            info("order n/4 -> n/2", (quarter / half).log2()),
        ])
    }

    fn determinant(&mut self) -> Result<Vec<Metric>> {
        let solver = &self.aubin()?.solver;
        let mut worst = 0.0_f64;
        for k in [0.1, 1.0, 4.0] {
            let col = solver.solve_m(k);
            let expect = crate::Complex64::new(0.0, -2.0 * k) * col.f0();
            worst = worst.max((col.det - expect).norm() / expect.norm());
        }
        Ok(vec![at_most("relative |D + 2ik f(0,k)|", worst, 1e-8)])
    }

    fn resonance(&mut self) -> Result<Vec<Metric>> {
        let g = self.cfg.grid;
        let mut mags = Vec::new();
        for frac in [0.25, 0.5, 1.0] {
            let (_, s) = self.solver(&aubin(1.0), g.rescaled(frac * g.r_max))?;
            mags.push(s.solve_m(0.0).m[0].norm());
        }
        let (_, free) = self.solver(&PotentialSpec::Free, g)?;
        let (_, half) = self.solver(&aubin(0.5), g)?;
        let free0 = free.solve_m(0.0).m[0].norm();
        let half0 = half.solve_m(0.0).m[0].norm();
        let eps = self.cfg.spectral.resonance_eps;
        Ok(vec![
            at_most("|f(0,0)| aubin(1)", mags[2], 1e-3),
            flag("|f(0,0)| decreasing in r_max", mags[0] > mags[1] && mags[1] > mags[2], "decreasing"),
            info("|f(0,0)| at r_max/4", mags[0]),
            info("|f(0,0)| at r_max/2", mags[1]),
            at_most("| |f(0,0)| - 1 | free", (free0 - 1.0).abs(), 1e-12),
            at_least("|f(0,0)| half-strength", half0, eps),
        ])
    }

    fn parseval_defect(pipe: &Pipeline, inputs: &[Vec<f64>]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for f in inputs {
            let g = pipe.basis.forward_reduced(f)?;
            let bound: f64 = pipe.bound.states.iter().map(|b| pipe.grid.inner(f, &b.psi).powi(2)).sum();
            let norm2 = pipe.grid.inner(f, f);
            worst = worst.max((pipe.basis.spectral_energy(&g) + bound - norm2).abs() / norm2);
        }
        Ok(worst)
    }

    fn parseval(&mut self) -> Result<Vec<Metric>> {
        let seed = self.cfg.seed;
        let fine = {
            let pipe = self.aubin()?;
            let inputs = random_smooth_inputs(pipe.grid.nodes(), RANDOM_INPUTS, seed);
            Self::parseval_defect(pipe, &inputs)?
        };
        self.release();
        let coarse = {
            let pipe = Pipeline::build(&aubin(1.0), self.half_grid(), self.cfg.spectral)?;
            let inputs = random_smooth_inputs(pipe.grid.nodes(), RANDOM_INPUTS, seed);
            Self::parseval_defect(&pipe, &inputs)?
        };
        Ok(vec![
            at_most("max relative parseval defect", fine, 1e-4),
            info("defect at n/2", coarse),
            flag("defect shrinks under refinement", fine < coarse, "fine < coarse"),
        ])
    }

    fn tables(&self, grid: GridParams, rows: impl Fn(&crate::numerics::RadialGrid) -> Vec<usize>, k_lo: f64, k_hi: f64) -> Result<KernelTables> {
        let (_, solver) = self.solver(&aubin(1.0), grid)?;
        let g = build_radial_grid(grid.r_max, grid.n, Grading::Uniform)?;
        let sg = crate::numerics::build_spectral_grid(grid.j_min, grid.j_max, grid.r_max)?;
        build_kernel_tables(&solver, &sg, &rows(&g), k_lo, k_hi, &self.cfg.spectral)
    }

    fn high_energy(&mut self) -> Result<Vec<Metric>> {
        self.release();
        let mu = Multiplier::HighPass {
            bump: BumpFunction::default(),
        };
        let rows = |g: &crate::numerics::RadialGrid| (0..200).map(|i| g.nearest(0.3 * i as f64)).collect();
        let k_hi = 2f64.powi(self.cfg.grid.j_max + 1);
        let mut reports = Vec::new();
        for grid in [self.cfg.grid, self.half_grid()] {
            let t = self.tables(grid, rows, 1.0, k_hi)?;
            reports.push(verify_high_energy_bounds(&decompose_kernel(&t, &mu)?)?);
        }
        let (fine, coarse) = (&reports[0], &reports[1]);
        Ok(vec![
            within("K3 diagonal slope", fine.k3_diagonal_slope, -1.0, 0.15),
            flag("sup <r-r'>^2 |K2| finite", fine.c2.is_finite(), "finite"),
            at_most("relative change of C2 under halving", (fine.c2 / coarse.c2 - 1.0).abs(), 0.1),
            info("C2", fine.c2),
            info("C3", fine.c3),
        ])
    }

    fn low_energy(&mut self) -> Result<Vec<Metric>> {
        self.release();
        let bump = BumpFunction::default();
        let mu = Multiplier::LowPass { bump }.product(Multiplier::SinLog);
        let smooth = Multiplier::LowPass { bump };
        let rows = |g: &crate::numerics::RadialGrid| (0..240).map(|i| g.nearest(0.5 * i as f64)).collect();
        let blocks = self.cfg.grid.j_min..=0;
        let t = self.tables(self.cfg.grid, rows, 0.0, 1.0)?;
        let report = verify_low_energy_bounds(&t, &decompose_kernel(&t, &mu)?, &mu, blocks.clone(), 5.0)?;
        let plain = verify_low_energy_bounds(&t, &decompose_kernel(&t, &smooth)?, &smooth, blocks, 5.0)?;
        drop(t);
        let mut sups = Vec::new();
        for grid in [self.cfg.grid, self.half_grid()] {
            let every = |g: &crate::numerics::RadialGrid| (0..g.len()).step_by(4).collect();
            let t = self.tables(grid, every, 0.0, 1.0)?;
            let r = t.r().to_vec();
            let near = |x: f64| {
                r.iter()
                    .enumerate()
                    .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
                    .map_or(0, |p| p.0)
            };
            let pairs: Vec<(usize, usize)> = (1..=50u64)
                .map(|i| (near(0.5 + 49.5 * radical_inverse(i, 2)), near(0.5 + 49.5 * radical_inverse(i, 3))))
                .collect();
            sups.push(hormander_scan(&t, &mu, &pairs)?.sup);
        }
        Ok(vec![
            at_most("sup|K1| / sup|K|", report.k1_ratio, 1e-3),
            within("d_r K2 envelope slope", report.dr_k2_slope, -2.0, 0.2),
            at_least("per-block constant trend (log2 C_j vs j)", report.block_growth, BLOCK_GROWTH_TOL),
            info("largest per-block constant", report.block_constant),
            flag("hormander sup finite", sups[0].is_finite(), "finite"),
            at_most("relative change of hormander sup under halving", (sups[0] / sups[1] - 1.0).abs(), 0.1),
            info("d_r K2 slope for the smooth low-pass", plain.dr_k2_slope),
        ])
    }

    fn window(&mut self) -> Result<Vec<Metric>> {
        self.release();
        let mut cfg = self.cfg.clone();
        for p in STABLE_P.iter().chain(&GROWING_P) {
            if !cfg.ps.contains(p) {
                cfg.ps.push(*p);
            }
        }
        let mut metrics = Vec::new();
        let rep = lp_window_experiment(&cfg.window_config(aubin(1.0)), cfg.spectral)?;
        for t in &rep.trends {
            let name = format!("aubin growth p={}", t.p);
            let expect = if STABLE_P.contains(&t.p) {
                Some(Trend::Stable)
            } else if GROWING_P.contains(&t.p) {
                Some(Trend::Growing)
            } else {
                None
            };
            metrics.push(match expect {
                Some(Trend::Stable) => Metric {
                    target: "stable (< 0.1)".into(),
                    ..flag(&name, t.classification == Trend::Stable, "")
                },
                Some(Trend::Growing) => Metric {
                    target: "growing (>= 0.1)".into(),
                    ..flag(&name, t.classification == Trend::Growing, "")
                },
                None => info(&name, t.growth),
            });
            let last = metrics.last_mut().expect("pushed");
            last.value = t.growth;
        }
        let free = lp_window_experiment(&cfg.window_config(PotentialSpec::Free), cfg.spectral)?;
        for t in &free.trends {
            metrics.push(Metric {
                value: t.growth,
                target: "stable (< 0.1)".into(),
                ..flag(&format!("free growth p={}", t.p), t.classification == Trend::Stable, "")
            });
        }
        Ok(metrics)
    }

    fn square_function_l2(&mut self) -> Result<Vec<Metric>> {
        let seed = self.cfg.seed.wrapping_add(10);
        let pipe = self.aubin()?;
        let part = pipe.partition();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for f in random_smooth_inputs(pipe.grid.nodes(), RANDOM_INPUTS, seed) {
            let sf = square_function(&pipe.basis, &pipe.bound, &pipe.grid, &part, &f, part.j_min..=part.j_max)?;
            let fc = crate::spectral::project_continuous(&pipe.bound, &pipe.grid, &f);
            let ratio = pipe.grid.l2_norm(&sf.sf) / pipe.grid.l2_norm(&fc);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        Ok(vec![
            at_least("min |S f| / |P_c f|", lo, FRAC_1_SQRT_2 - 1e-4),
            at_most("max |S f| / |P_c f|", hi, 1.0 + 1e-4),
        ])
    }

    fn functional_calculus(&mut self) -> Result<Vec<Metric>> {
        let seed = self.cfg.seed.wrapping_add(11);
        let pipe = self.aubin()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mu = Multiplier::random_sign(pipe.partition(), &mut rng);
        let nu = Multiplier::HighPass {
            bump: BumpFunction::default(),
        };
        let inputs = random_smooth_inputs(pipe.grid.nodes(), RANDOM_INPUTS, seed);
        let once = pipe.apply(&nu, &inputs)?;
        let twice = pipe.apply(&mu, &once)?;
        let joint = pipe.apply(&mu.clone().product(nu), &inputs)?;
        let mut worst = 0.0_f64;
        for (a, b) in twice.iter().zip(&joint) {
            let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
            worst = worst.max(pipe.grid.l2_norm(&d) / pipe.grid.l2_norm(b));
        }
        Ok(vec![at_most("relative |M_mu M_nu f - M_(mu nu) f|", worst, 1e-4)])
    }

    fn determinism(&mut self) -> Result<Vec<Metric>> {
        let a = determinism_probe(&self.cfg)?;
        let b = determinism_probe(&self.cfg)?;
        Ok(vec![flag("identical JSON reports", a == b, "byte-identical")])
    }
}

/// A small seeded run through every randomized stage, serialized as the CLI
/// would write it.
pub fn determinism_probe(cfg: &RunConfig) -> Result<String> {
    let grid = GridParams {
        r_max: 50.0,
        n: 1024,
        j_min: -3,
        j_max: 3,
    };
    let mut small = cfg.clone();
    small.grid = grid;
    small.levels = vec![25.0, 50.0];
    small.ps = vec![1.5, 2.0, 3.0];
    small.seeds = 4;
    let pipe = Pipeline::build(&aubin(1.0), grid, cfg.spectral)?;
    let inputs = random_smooth_inputs(pipe.grid.nodes(), 2, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mu = Multiplier::random_sign(pipe.partition(), &mut rng);
    let applied = pipe.apply(&mu, &inputs)?;
    let part = pipe.partition();
    let sf = square_function(&pipe.basis, &pipe.bound, &pipe.grid, &part, &inputs[0], part.j_min..=part.j_max)?;
    let window = lp_window_experiment(&small.window_config(aubin(1.0)), cfg.spectral)?;
    let report = serde_json::json!({
        "f0": pipe.scattering.f0.iter().step_by(97).map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "applied": applied,
        "sf": sf.sf,
        "window": window,
    });
    crate::io::to_json_report(&small, &report)
}

/// `A_p` classification of `r^{2−p}` needs no grid.
fn ap_window() -> Vec<Metric> {
    let family = standard_ap_family();
    let mut out = Vec::new();
    for p in BOUNDED_AP {
        let scan = ap_scan(p, &family).expect("valid p");
        out.push(Metric {
            value: scan.sup,
            ..flag(&format!("p={p} bounded"), !scan.divergent && scan.sup.is_finite(), "bounded")
        });
    }
    for p in DIVERGENT_AP {
        let scan = ap_scan(p, &family).expect("valid p");
        out.push(flag(&format!("p={p} divergent"), scan.divergent, "divergent"));
    }
    out
}

/// Criteria in an order that keeps at most one large eigenbasis alive.
pub fn suite_ids(suite: Suite) -> Vec<u32> {
    match suite {
        Suite::Full => vec![1, 8, 12, 4, 2, 3, 5, 10, 11, 6, 7, 9],
        Suite::FreeOnly => FREE_ONLY.to_vec(),
    }
}

pub fn run_suite(cfg: &RunConfig, suite: Suite, mut progress: impl FnMut(&CriterionResult)) -> VerifyReport {
    let mut lab = Lab::new(cfg.clone());
    let mut results = Vec::new();
    for id in suite_ids(suite) {
        let r = lab.run(id);
        progress(&r);
        results.push(r);
    }
    results.sort_by_key(|r| r.id);
    VerifyReport {
        suite,
        pass: results.iter().all(|r| r.pass),
        results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_square_function_of_single_block_input() {
        // an input whose sine transform lives inside one genuine block
        let g = build_radial_grid(40.0, 1024, Grading::Uniform).unwrap();
        let r = g.nodes();
        let f: Vec<f64> = r.iter().map(|&x| odd_gaussian(x, 10.0, 3.0) * (3.0 * x).cos()).collect();
        let part = DyadicPartition::new(-3, 4);
        let sf = classical_square_function(r, &f, &part, 32.0);
        let d: Vec<f64> = sf.iter().zip(&f).map(|(a, b)| a - b.abs()).collect();
        assert!(g.l2_norm(&d) < 0.35 * g.l2_norm(&f));
        assert!(g.l2_norm(&sf) <= g.l2_norm(&f) * (1.0 + 1e-6));
    }
}

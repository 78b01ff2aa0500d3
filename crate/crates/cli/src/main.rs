//! `halfline`: runs one experiment and writes CSV/JSON results that embed
//! the full run configuration.
//!
//! Exit codes: 0 on success, 1 when verification fails or a computation
//! errors, 2 on invalid arguments or configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use halfline::config::{Experiment, RunConfig, Suite};
use halfline::io::{fmt_float, read_samples, write_csv, write_json};
use halfline::jost::{detect_resonance, JostTable};
use halfline::lp::{ap_scan, lp_norm, lp_window_experiment, square_function, standard_ap_family};
use halfline::multiplier::{
    build_kernel_tables, decompose_kernel, verify_high_energy_bounds, verify_low_energy_bounds,
    Support,
};
use halfline::numerics::build_spectral_grid;
use halfline::pipeline::Pipeline;
use halfline::potentials::PotentialSpec;
use halfline::spectral::{forward_transform, project_continuous};
use halfline::verify::{random_smooth_inputs, run_suite};
use log::info;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "halfline", version, about = "Spectral multipliers for radial Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    potential: Option<PotentialKind>,
    /// Aubin scale, required with `--potential aubin`.
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Coupling multiplying the potential.
    #[arg(long, global = true)]
    strength: Option<f64>,
    /// Two-column CSV `r, V(r)` for `--potential table`.
    #[arg(long, global = true)]
    table: Option<String>,
    /// Keeps the mesh unless `--n` is also given.
    #[arg(long, global = true)]
    rmax: Option<f64>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    jmin: Option<i32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    jmax: Option<i32>,
    /// Exponents, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Window levels (`r_max` values), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    levels: Option<Vec<f64>>,
    /// Number of random sign patterns.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    #[arg(long, global = true, value_enum)]
    suite: Option<SuiteArg>,
    /// Worker threads for the global pool.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Jost function at the origin, the Jost table and resonance detection.
    Jost,
    /// Distorted Fourier coefficients of an input and its round trip.
    Transform {
        /// Two-column CSV `r, f(r)`; defaults to `r·exp(−r²)`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Kernel pieces of the configured multiplier and their bounds.
    Kernel,
    /// Weighted square-function ratios on random smooth inputs.
    Sqfn,
    /// `A_p` scan of `r^{2−p}`.
    Apscan,
    /// Multiplier-norm bounds across refinement levels.
    Window,
    /// Acceptance criteria.
    Verify,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PotentialKind {
    Free,
    Aubin,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Full,
    FreeOnly,
}

struct Usage(String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::msg(msg.into()).context(UsageMarker)
}

#[derive(Debug)]
struct UsageMarker;

impl std::fmt::Display for UsageMarker {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("usage error")
    }
}

fn resolve(cli: &Cli) -> std::result::Result<RunConfig, Usage> {
    let c = &cli.common;
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_json_file(path)
            .map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?,
        None => RunConfig::default(),
    };
    cfg.experiment = match cli.command {
        Command::Jost => Experiment::Jost,
        Command::Transform { .. } => Experiment::Transform,
        Command::Kernel => Experiment::Kernel,
        Command::Sqfn => Experiment::Sqfn,
        Command::Apscan => Experiment::Apscan,
        Command::Window => Experiment::Window,
        Command::Verify => Experiment::Verify,
    };
    let strength = c.strength.unwrap_or(match cfg.potential {
        PotentialSpec::Aubin { strength, .. } => strength,
        _ => 1.0,
    });
    match c.potential {
        Some(PotentialKind::Free) => cfg.potential = PotentialSpec::Free,
        Some(PotentialKind::Aubin) => {
            let a = c.a.ok_or_else(|| Usage("--potential aubin needs --a".into()))?;
            cfg.potential = PotentialSpec::Aubin { a, strength };
        }
        Some(PotentialKind::Table) => {
            let path = c.table.clone().ok_or_else(|| Usage("--potential table needs --table".into()))?;
            cfg.potential = PotentialSpec::Table { path };
        }
        None => {
            if let PotentialSpec::Aubin { a, .. } = cfg.potential {
                cfg.potential = PotentialSpec::Aubin { a: c.a.unwrap_or(a), strength };
            } else if c.a.is_some() || c.strength.is_some() {
                return Err(Usage("--a and --strength apply to the aubin potential only".into()));
            }
        }
    }
    if let Some(r) = c.rmax {
        cfg.grid = if c.n.is_some() {
            halfline::pipeline::GridParams { r_max: r, ..cfg.grid }
        } else {
            cfg.grid.rescaled(r)
        };
    }
    if let Some(n) = c.n {
        cfg.grid.n = n;
    }
    if let Some(j) = c.jmin {
        cfg.grid.j_min = j;
    }
    if let Some(j) = c.jmax {
        cfg.grid.j_max = j;
    }
    if let Some(ps) = &c.p {
        cfg.ps = ps.clone();
    }
    if let Some(levels) = &c.levels {
        cfg.levels = levels.clone();
    }
    if let Some(s) = c.seeds {
        cfg.seeds = s;
    }
    if let Some(s) = c.suite {
        cfg.suite = match s {
            SuiteArg::Full => Suite::Full,
            SuiteArg::FreeOnly => Suite::FreeOnly,
        };
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    cfg.validate().map_err(|e| Usage(e.to_string()))?;
    Ok(cfg)
}

fn out_path(cfg: &RunConfig, name: &str) -> PathBuf {
    Path::new(&cfg.out).join(name)
}

fn run_jost(cfg: &RunConfig) -> Result<()> {
    let pipe = Pipeline::build(&cfg.potential, cfg.grid, cfg.spectral)?;
    let s = &pipe.scattering;
    let rows: Vec<Vec<String>> = (0..s.k.len())
        .map(|i| {
            vec![
                fmt_float(s.k[i]),
                fmt_float(s.f0[i].re),
                fmt_float(s.f0[i].im),
                fmt_float(s.f0p[i].re),
                fmt_float(s.f0p[i].im),
                fmt_float(s.wronskian_defect[i]),
            ]
        })
        .collect();
    write_csv(
        out_path(cfg, "scattering.csv"),
        cfg,
        &["k", "re_f0", "im_f0", "re_f0p", "im_f0p", "wronskian_defect"],
        &rows,
    )?;

    let mut radii = vec![0.0];
    let mut r = 0.5;
    while r <= pipe.grid.r_max() {
        radii.push(r);
        r *= 2.0;
    }
    let idx: Vec<usize> = radii.iter().map(|&r| pipe.grid.nearest(r)).collect();
    let ks: Vec<f64> = pipe.spectral.nodes().iter().step_by(8).copied().collect();
    let table = JostTable::build(&pipe.solver, &ks, &idx, true);
    let dk = table.dm_dk.as_ref().expect("requested");
    let mut rows = Vec::with_capacity(idx.len() * ks.len());
    for a in 0..idx.len() {
        for b in 0..ks.len() {
            rows.push(vec![
                fmt_float(table.r[a]),
                fmt_float(table.k[b]),
                fmt_float(table.m[[a, b]].re),
                fmt_float(table.m[[a, b]].im),
                fmt_float(table.dm_dr[[a, b]].re),
                fmt_float(table.dm_dr[[a, b]].im),
                fmt_float(dk[[a, b]].re),
                fmt_float(dk[[a, b]].im),
            ]);
        }
    }
    write_csv(
        out_path(cfg, "jost_table.csv"),
        cfg,
        &["r", "k", "re_m", "im_m", "re_dm_dr", "im_dm_dr", "re_dm_dk", "im_dm_dk"],
        &rows,
    )?;

    let resonance = detect_resonance(&pipe.potential, &pipe.grid, cfg.spectral.resonance_eps);
    let (c_lo, c_hi) = s.f0_bounds();
    let report = json!({
        "resonance": resonance,
        "f0_at_zero": s.f0_at_zero,
        "f0p_at_zero": s.f0p_at_zero,
        "dk_f0_at_0": [s.dk_f0_at_0.re, s.dk_f0_at_0.im],
        "max_wronskian_defect": s.max_wronskian_defect(),
        "max_determinant_defect": s.max_determinant_defect(),
        "f0_lower_constant": c_lo,
        "f0_upper_constant": c_hi,
        "tail_error": pipe.solver.tail_error(),
        "bound_state_energies": pipe.bound.energies(),
    });
    write_json(out_path(cfg, "resonance.json"), cfg, &report)?;
    info!("|f(0,0)| = {:.3e}, resonant: {}", resonance.magnitude, resonance.resonant);
    Ok(())
}

/// Linear interpolation onto `nodes`, zero outside the samples.
fn resample(r: &[f64], f: &[f64], nodes: &[f64]) -> Vec<f64> {
    nodes
        .iter()
        .map(|&x| {
            let i = r.partition_point(|&v| v < x);
            if i == 0 {
                if r.first() == Some(&x) { f[0] } else { 0.0 }
            } else if i == r.len() {
                0.0
            } else {
                let t = (x - r[i - 1]) / (r[i] - r[i - 1]);
                f[i - 1] + t * (f[i] - f[i - 1])
            }
        })
        .collect()
}

fn run_transform(cfg: &RunConfig, input: Option<&Path>) -> Result<()> {
    let pipe = Pipeline::build(&cfg.potential, cfg.grid, cfg.spectral)?;
    let nodes = pipe.grid.nodes();
    let f = match input {
        Some(path) => {
            let (r, f) = read_samples(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            if r.windows(2).any(|w| w[1] <= w[0]) {
                return Err(usage(format!("{}: radii must increase", path.display())));
            }
            resample(&r, &f, nodes)
        }
        None => nodes.iter().map(|r| r * (-r * r).exp()).collect(),
    };
    let coeffs = forward_transform(&pipe.basis, &pipe.bound, &pipe.grid, &f)?;
    let weights = pipe.basis.k_weights();
    let rows: Vec<Vec<String>> = (0..coeffs.k.len())
        .map(|i| {
            vec![
                fmt_float(coeffs.k[i]),
                fmt_float(coeffs.values[i].re),
                fmt_float(coeffs.values[i].im),
                fmt_float(weights[i]),
            ]
        })
        .collect();
    write_csv(out_path(cfg, "coefficients.csv"), cfg, &["k", "re_F", "im_F", "weight"], &rows)?;

    let fc = project_continuous(&pipe.bound, &pipe.grid, &f);
    let g = pipe.basis.forward_reduced(&f)?;
    let back = pipe.basis.inverse_reduced(&g)?;
    let diff: Vec<f64> = fc.iter().zip(&back).map(|(a, b)| a - b).collect();
    let norm = pipe.grid.l2_norm(&f);
    let bound_energy: f64 = coeffs.bound_components.iter().map(|c| c * c).sum();
    let report = json!({
        "l2_norm": norm,
        "round_trip_error": pipe.grid.l2_norm(&diff) / pipe.grid.l2_norm(&fc).max(f64::MIN_POSITIVE),
        "parseval_defect": (pipe.basis.spectral_energy(&g) + bound_energy - norm * norm).abs() / (norm * norm).max(f64::MIN_POSITIVE),
        "bound_components": coeffs.bound_components,
        "resonant": pipe.basis.is_resonant(),
    });
    write_json(out_path(cfg, "transform.json"), cfg, &report)?;
    Ok(())
}

fn run_kernel(cfg: &RunConfig) -> Result<()> {
    let model = cfg.potential.build()?;
    let grid = halfline::numerics::build_radial_grid(cfg.grid.r_max, cfg.grid.n, halfline::numerics::Grading::Uniform)?;
    let spectral = build_spectral_grid(cfg.grid.j_min, cfg.grid.j_max, cfg.grid.r_max)?;
    let solver = halfline::jost::JostSolver::new(&model, &grid, cfg.spectral.interpolation);
    let mu = &cfg.multiplier;
    let support = mu.support();
    let (step, count, k_lo, k_hi) = match support {
        Support::High => (0.3, 200, 1.0, spectral.k_max()),
        Support::Low => (0.5, 240, 0.0, 1.0),
        Support::Full => (0.3, 200, 0.0, spectral.k_max()),
    };
    let rows: Vec<usize> = (0..count)
        .map(|i| grid.nearest(step * i as f64))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let tables = build_kernel_tables(&solver, &spectral, &rows, k_lo, k_hi, &cfg.spectral)?;
    let d = decompose_kernel(&tables, mu)?;
    let r = &d.r;
    let mut out = Vec::with_capacity(r.len() * r.len());
    for a in 0..r.len() {
        for b in 0..r.len() {
            out.push(vec![
                fmt_float(r[a]),
                fmt_float(r[b]),
                fmt_float(d.k[[a, b]]),
                fmt_float(d.k1[[a, b]]),
                fmt_float(d.k2[[a, b]]),
                fmt_float(d.k3[[a, b]]),
            ]);
        }
    }
    write_csv(out_path(cfg, "kernel.csv"), cfg, &["r", "r_prime", "K", "K1", "K2", "K3"], &out)?;
    let bounds = match support {
        Support::High => json!({ "high_energy": verify_high_energy_bounds(&d)? }),
        Support::Low => json!({
            "low_energy": verify_low_energy_bounds(&tables, &d, mu, cfg.grid.j_min..=0.min(cfg.grid.j_max), 5.0)?
        }),
        Support::Full => json!({}),
    };
    let report = json!({
        "support": support,
        "resonant": d.resonant,
        "piece_sum_defect": d.piece_sum_defect(),
        "symmetry_defect": d.symmetry_defect(),
        "bounds": bounds,
    });
    write_json(out_path(cfg, "kernel_bounds.json"), cfg, &report)?;
    Ok(())
}

fn run_sqfn(cfg: &RunConfig) -> Result<()> {
    let pipe = Pipeline::build(&cfg.potential, cfg.grid, cfg.spectral)?;
    let part = pipe.partition();
    let inputs = random_smooth_inputs(pipe.grid.nodes(), 5, cfg.seed);
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (n, f) in inputs.iter().enumerate() {
        let sf = square_function(&pipe.basis, &pipe.bound, &pipe.grid, &part, f, part.j_min..=part.j_max)?;
        let fc = project_continuous(&pipe.bound, &pipe.grid, f);
        let l2 = pipe.grid.l2_norm(&sf.sf) / pipe.grid.l2_norm(&fc);
        for &p in &cfg.ps {
            let s = 2.0 / p - 1.0;
            let ratio = lp_norm(&sf.sf, p, &pipe.grid, s)? / lp_norm(f, p, &pipe.grid, s)?;
            rows.push(vec![n.to_string(), fmt_float(p), fmt_float(s), fmt_float(ratio), fmt_float(l2)]);
            records.push(json!({ "input": n, "p": p, "s": s, "ratio": ratio, "l2_ratio": l2 }));
        }
    }
    write_csv(out_path(cfg, "sqfn.csv"), cfg, &["input", "p", "s", "ratio", "l2_ratio"], &rows)?;
    write_json(out_path(cfg, "sqfn.json"), cfg, &records)?;
    Ok(())
}

fn run_apscan(cfg: &RunConfig) -> Result<()> {
    let family = standard_ap_family();
    let scans = cfg.ps.iter().map(|&p| ap_scan(p, &family)).collect::<halfline::Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = scans
        .iter()
        .map(|s| {
            vec![
                fmt_float(s.p),
                fmt_float(s.s),
                fmt_float(s.sup),
                if s.divergent { "divergent" } else { "bounded" }.to_string(),
            ]
        })
        .collect();
    write_csv(out_path(cfg, "apscan.csv"), cfg, &["p", "s", "sup", "flag"], &rows)?;
    write_json(out_path(cfg, "apscan.json"), cfg, &scans)?;
    Ok(())
}

fn run_window(cfg: &RunConfig) -> Result<()> {
    let report = lp_window_experiment(&cfg.window_config(cfg.potential.clone()), cfg.spectral)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_float(r.p),
                fmt_float(r.level),
                fmt_float(r.bound),
                r.maximizer_id.clone(),
                r.pattern.to_string(),
                serde_json::to_value(r.classification).expect("enum").as_str().unwrap_or("").to_string(),
            ]
        })
        .collect();
    write_csv(
        out_path(cfg, "window.csv"),
        cfg,
        &["p", "level", "bound", "maximizer_id", "pattern", "classification"],
        &rows,
    )?;
    write_json(out_path(cfg, "window.json"), cfg, &report)?;
    for t in &report.trends {
        info!("p = {}: growth {:.3} ({:?})", t.p, t.growth, t.classification);
    }
    Ok(())
}

fn run_verify(cfg: &RunConfig) -> Result<bool> {
    let report = run_suite(cfg, cfg.suite, |r| println!("{}", r.line()));
    write_json(out_path(cfg, "verify.json"), cfg, &report)?;
    let failing = report.failing();
    if failing.is_empty() {
        println!("all criteria passed");
    } else {
        println!("failing criteria: {failing:?}");
    }
    Ok(report.pass)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<bool> {
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out))?;
    info!("experiment {:?}, grid {:?}", cfg.experiment, cfg.grid);
    match &cli.command {
        Command::Jost => run_jost(cfg)?,
        Command::Transform { input } => run_transform(cfg, input.as_deref())?,
        Command::Kernel => run_kernel(cfg)?,
        Command::Sqfn => run_sqfn(cfg)?,
        Command::Apscan => run_apscan(cfg)?,
        Command::Window => run_window(cfg)?,
        Command::Verify => return run_verify(cfg),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match run(&cli, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<UsageMarker>().is_some() => {
            eprintln!("error: {}", e.root_cause());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

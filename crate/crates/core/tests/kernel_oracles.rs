use std::f64::consts::PI;

use halfline::jost::JostSolver;
use halfline::lp::square_function;
use halfline::multiplier::{
    apply_multiplier, assemble_kernel, build_kernel_tables, decompose_kernel, dr_k2, kernel_matvec,
    KernelTables, Multiplier,
};
use halfline::numerics::{build_radial_grid, build_spectral_grid, BumpFunction, Grading};
use halfline::pipeline::{GridParams, Pipeline};
use halfline::potentials::PotentialSpec;
use halfline::spectral::{project_continuous, SpectralOptions};

const SMALL: GridParams = GridParams {
    r_max: 40.0,
    n: 1024,
    j_min: -4,
    j_max: 3,
};

fn aubin() -> PotentialSpec {
    PotentialSpec::Aubin { a: 1.0, strength: 1.0 }
}

fn odd_gaussian(r: f64, c: f64, s: f64) -> f64 {
    let q = 0.5 / (s * s);
    (-q * (r - c).powi(2)).exp() - (-q * (r + c).powi(2)).exp()
}

fn inputs(pipe: &Pipeline) -> Vec<Vec<f64>> {
    vec![
        pipe.grid.sample(|r| odd_gaussian(r, 3.0, 1.0)),
        pipe.grid.sample(|r| odd_gaussian(r, 8.0, 2.0) * (1.5 * r).cos()),
        pipe.grid.sample(|r| r * (-0.5 * r * r).exp()),
    ]
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn square_function_pieces_and_l2_bounds() {
    let pipe = Pipeline::build(&aubin(), SMALL, SpectralOptions::default()).unwrap();
    let part = pipe.partition();
    for f in inputs(&pipe) {
        let fc = project_continuous(&pipe.bound, &pipe.grid, &f);
        let sf = square_function(&pipe.basis, &pipe.bound, &pipe.grid, &part, &f, part.j_min..=part.j_max).unwrap();
        // the blocks form a partition of unity on the window, so they add up
        // to the discrete round trip
        let sum: Vec<f64> = (0..fc.len()).map(|i| sf.blocks.iter().map(|b| b[i]).sum()).collect();
        let back = pipe.basis.inverse_reduced(&pipe.basis.forward_reduced(&fc).unwrap()).unwrap();
        let d: Vec<f64> = sum.iter().zip(&back).map(|(a, b)| a - b).collect();
        assert!(pipe.grid.l2_norm(&d) < 1e-12 * pipe.grid.l2_norm(&fc));
        // 1/2 ≤ Σψ_j² ≤ 1, up to the transform error of this coarse grid
        let ratio = pipe.grid.l2_norm(&sf.sf) / pipe.grid.l2_norm(&fc);
        assert!((std::f64::consts::FRAC_1_SQRT_2 - 1e-3..=1.0 + 1e-3).contains(&ratio), "{ratio}");
        // pointwise Cauchy-Schwarz
        assert!(sf.sf.iter().zip(&sum).all(|(s, t)| t.abs() <= s * (sf.blocks.len() as f64).sqrt() + 1e-12));
    }
    assert!(square_function(&pipe.basis, &pipe.bound, &pipe.grid, &part, &inputs(&pipe)[0], -9..=0).is_err());
}

#[test]
fn kernel_matvec_matches_spectral_application() {
    let pipe = Pipeline::build(&aubin(), SMALL, SpectralOptions::default()).unwrap();
    let mu = Multiplier::HighPass {
        bump: BumpFunction::default(),
    };
    let all: Vec<usize> = (0..pipe.grid.len()).collect();
    let k = assemble_kernel(&pipe.basis, &mu, &all, &all).unwrap();
    for f in inputs(&pipe) {
        let fc = project_continuous(&pipe.bound, &pipe.grid, &f);
        let a = kernel_matvec(&pipe.basis, &k, &fc).unwrap();
        let b = apply_multiplier(&pipe.basis, &pipe.bound, &pipe.grid, &mu, &f).unwrap();
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        assert!(pipe.grid.l2_norm(&d) < 1e-10 * pipe.grid.l2_norm(&b));
    }
    // symmetric up to rounding
    let asym = max_abs((0..all.len()).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| k[[i, j]] - k[[j, i]]));
    assert!(asym < 1e-10 * max_abs(k.iter().copied()));
}

fn tables(spec: &PotentialSpec, params: GridParams, rows: &[usize], k_lo: f64, k_hi: f64) -> KernelTables {
    let model = spec.build().unwrap();
    let grid = build_radial_grid(params.r_max, params.n, Grading::Uniform).unwrap();
    let spectral = build_spectral_grid(params.j_min, params.j_max, params.r_max).unwrap();
    let solver = JostSolver::new(&model, &grid, Default::default());
    build_kernel_tables(&solver, &spectral, rows, k_lo, k_hi, &SpectralOptions::default()).unwrap()
}

#[test]
fn free_kernel_is_its_cosine_terms() {
    let mu = Multiplier::HighPass {
        bump: BumpFunction::default(),
    };
    let rows: Vec<usize> = (0..60).map(|i| 8 * i).collect();
    let t = tables(&PotentialSpec::Free, SMALL, &rows, 1.0, 16.0);
    let d = decompose_kernel(&t, &mu).unwrap();
    let sup = max_abs(d.k.iter().copied());
    assert!(max_abs(d.k2.iter().copied()) < 1e-12 * sup);

    // K₃(r,r′) = −(1/π)∫ μ(k) cos((r+r′)k) dk by composite Simpson
    let simpson = |x: f64| {
        let n = 20000;
        let h = 15.0 / n as f64;
        let g = |k: f64| mu.value(k) * (x * k).cos();
        let mut s = g(1.0) + g(16.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(1.0 + i as f64 * h);
        }
        -s * h / (3.0 * PI)
    };
    let r = t.r();
    for &(a, b) in &[(0, 0), (3, 7), (10, 40), (59, 59), (25, 5)] {
        let want = simpson(r[a] + r[b]);
        assert!((d.k3[[a, b]] - want).abs() < 1e-8 * sup, "({a},{b}): {} vs {want}", d.k3[[a, b]]);
    }
}

#[test]
fn radial_derivative_of_k2_matches_differences() {
    // fine mesh and a narrow window keep h·k_max small for the stencil
    let params = GridParams {
        r_max: 20.0,
        n: 4096,
        j_min: -3,
        j_max: 1,
    };
    let rows: Vec<usize> = (0..=240).collect();
    for (mu, lo, hi) in [
        (Multiplier::HighPass { bump: BumpFunction::default() }, 1.0, 4.0),
        (Multiplier::LowPass { bump: BumpFunction::default() }, 0.0, 1.0),
    ] {
        let t = tables(&aubin(), params, &rows, lo, hi);
        let d = decompose_kernel(&t, &mu).unwrap();
        let dk = dr_k2(&t, &mu).unwrap();
        let h = t.r()[1] - t.r()[0];
        let scale = max_abs(dk.iter().copied());
        let mut worst = 0.0_f64;
        for a in 2..rows.len() - 2 {
            for b in (0..rows.len()).step_by(7) {
                let fd = (-d.k2[[a + 2, b]] + 8.0 * d.k2[[a + 1, b]] - 8.0 * d.k2[[a - 1, b]] + d.k2[[a - 2, b]]) / (12.0 * h);
                worst = worst.max((fd - dk[[a, b]]).abs());
            }
        }
        assert!(worst < 1e-4 * scale, "{mu:?}: {worst:e} vs {scale:e}");
    }
}

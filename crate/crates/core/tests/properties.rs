use std::sync::OnceLock;

use halfline::config::RunConfig;
use halfline::io::fmt_float;
use halfline::lp::{ap_ratio, lp_norm, square_function, ApStatus};
use halfline::multiplier::Multiplier;
use halfline::numerics::{build_radial_grid, BumpFunction, DyadicPartition, Grading, RadialGrid};
use halfline::pipeline::{GridParams, Pipeline};
use halfline::potentials::PotentialSpec;
use halfline::spectral::{project_continuous, SpectralOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid() -> &'static RadialGrid {
    static G: OnceLock<RadialGrid> = OnceLock::new();
    G.get_or_init(|| build_radial_grid(20.0, 400, Grading::Uniform).unwrap())
}

fn pipeline() -> &'static Pipeline {
    static P: OnceLock<Pipeline> = OnceLock::new();
    P.get_or_init(|| {
        let params = GridParams {
            r_max: 20.0,
            n: 256,
            j_min: -2,
            j_max: 2,
        };
        Pipeline::build(&PotentialSpec::Aubin { a: 1.0, strength: 1.0 }, params, SpectralOptions::default()).unwrap()
    })
}

/// Odd Gaussians with the given centres and amplitudes.
fn profile(g: &RadialGrid, terms: &[(f64, f64)]) -> Vec<f64> {
    g.sample(|r| {
        terms
            .iter()
            .map(|&(c, a)| a * ((-(r - c).powi(2)).exp() - (-(r + c).powi(2)).exp()))
            .sum()
    })
}

fn terms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1.0..12.0f64, -2.0..2.0f64), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ap_ratio_is_at_least_one(p in 1.05..6.0f64, t in 0.01..0.99f64, a in 0.0..50.0f64, len in 1e-3..1e3f64) {
        // s strictly inside (−1, p−1)
        let s = -1.0 + t * p;
        let r = ap_ratio(s, p, a, a + len).unwrap();
        prop_assert_eq!(r.status, ApStatus::Bounded);
        prop_assert!(r.value >= 1.0 - 1e-12);
    }

    #[test]
    fn ap_ratio_is_dilation_invariant(p in 1.05..6.0f64, t in 0.01..0.99f64, a in 0.0..10.0f64, len in 1e-2..1e2f64, lam in 1e-3..1e3f64) {
        let s = -1.0 + t * p;
        let x = ap_ratio(s, p, a, a + len).unwrap().value;
        let y = ap_ratio(s, p, lam * a, lam * (a + len)).unwrap().value;
        prop_assert!((x / y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lp_norm_is_a_norm(p in 1.01..8.0f64, s in -0.9..1.5f64, c in -5.0..5.0f64, f in terms(), g in terms()) {
        let (f, g) = (profile(grid(), &f), profile(grid(), &g));
        let nf = lp_norm(&f, p, grid(), s).unwrap();
        let cf: Vec<f64> = f.iter().map(|x| c * x).collect();
        prop_assert!((lp_norm(&cf, p, grid(), s).unwrap() - c.abs() * nf).abs() <= 1e-12 * nf.max(1.0));
        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let ng = lp_norm(&g, p, grid(), s).unwrap();
        prop_assert!(lp_norm(&sum, p, grid(), s).unwrap() <= (nf + ng) * (1.0 + 1e-12));
    }

    #[test]
    fn partition_sums_to_one_and_signs_stay_bounded(j_min in -6..0i32, width in 0..6i32, seed in any::<u64>(), x in 0.0..1.0f64) {
        let part = DyadicPartition::new(j_min, j_min + width);
        let k = 2f64.powf(j_min as f64 + x * (width as f64 + 2.0));
        prop_assert!((part.total(k) - 1.0).abs() < 1e-12);
        let mu = Multiplier::random_sign(part, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(mu.value(k).abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn products_multiply_values(k in 1e-3..64.0f64, j in -4..4i32, c in -3.0..3.0f64) {
        let a = Multiplier::Dyadic { j, bump: BumpFunction::default() };
        let b = Multiplier::Constant { value: c };
        let d = Multiplier::SinLog;
        let prod = a.clone().product(b.clone()).product(d.clone());
        prop_assert!((prod.value(k) - a.value(k) * b.value(k) * d.value(k)).abs() < 1e-14);
    }

    #[test]
    fn floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn configs_round_trip(seed in any::<u64>(), ps in prop::collection::vec(1.01..10.0f64, 1..6), n in 8usize..100_000) {
        let mut c = RunConfig { seed, ps, ..RunConfig::default() };
        c.grid.n = n;
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn square_function_is_homogeneous_and_l2_bounded(f in terms(), c in -4.0..4.0f64) {
        let pipe = pipeline();
        let part = pipe.partition();
        let f = profile(&pipe.grid, &f);
        let sf = square_function(&pipe.basis, &pipe.bound, &pipe.grid, &part, &f, part.j_min..=part.j_max).unwrap();
        let cf: Vec<f64> = f.iter().map(|x| c * x).collect();
        let scf = square_function(&pipe.basis, &pipe.bound, &pipe.grid, &part, &cf, part.j_min..=part.j_max).unwrap();
        let peak = sf.sf.iter().fold(0.0_f64, |m, v| m.max(*v));
        for (a, b) in scf.sf.iter().zip(&sf.sf) {
            prop_assert!((a - c.abs() * b).abs() <= 1e-12 * (1.0 + c.abs()) * peak.max(1e-300));
        }
        let fc = project_continuous(&pipe.bound, &pipe.grid, &f);
        prop_assert!(pipe.grid.l2_norm(&sf.sf) <= pipe.grid.l2_norm(&fc) * (1.0 + 1e-4));
    }
}

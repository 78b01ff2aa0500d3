use halfline::jost::{detect_resonance, find_bound_states, JostSolver};
use halfline::numerics::{build_radial_grid, Grading};
use halfline::potentials::PotentialSpec;
use halfline::Complex64 as C;

fn aubin(strength: f64) -> PotentialSpec {
    PotentialSpec::Aubin { a: 1.0, strength }
}

/// `1 + ∫ sin(ks)e^{iks}V(s)/k ds` (or `1 + ∫ sV ds` at `k = 0`) by Simpson.
fn born(v: impl Fn(f64) -> f64, k: f64, r_max: f64) -> C {
    let n = 400_000;
    let h = r_max / n as f64;
    let g = |s: f64| {
        if k == 0.0 {
            C::new(s * v(s), 0.0)
        } else {
            C::from_polar(v(s) * (k * s).sin() / k, k * s)
        }
    };
    let mut acc = g(0.0) + g(r_max);
    for i in 1..n {
        acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    C::new(1.0, 0.0) + acc * (h / 3.0)
}

#[test]
fn weak_coupling_follows_born_series() {
    let lambda = 1e-4;
    let model = aubin(lambda).build().unwrap();
    let grid = build_radial_grid(200.0, 8192, Grading::Uniform).unwrap();
    let solver = JostSolver::new(&model, &grid, Default::default());
    for k in [0.0, 0.05, 0.5, 2.0, 8.0] {
        let got = solver.solve_m(k).f0();
        let want = born(|s| model.value(s), k, 200.0);
        let first = (want - 1.0).norm();
        // the second Born term is O(λ²)
        assert!((got - want).norm() < 1e-3 * first.max(lambda), "k={k}: {got} vs {want}");
    }
}

#[test]
fn free_jost_function_is_one() {
    let model = PotentialSpec::Free.build().unwrap();
    let grid = build_radial_grid(50.0, 512, Grading::Uniform).unwrap();
    let solver = JostSolver::new(&model, &grid, Default::default());
    for k in [0.0, 0.3, 3.0, 30.0] {
        let col = solver.solve_m(k);
        assert!((col.f0() - 1.0).norm() < 1e-14);
        assert!((col.f0_prime() - C::new(0.0, k)).norm() < 1e-12 * (1.0 + k));
    }
}

#[test]
fn wronskian_defect_is_second_order() {
    let model = aubin(1.0).build().unwrap();
    let defect = |n: usize| {
        let grid = build_radial_grid(60.0, n, Grading::Uniform).unwrap();
        let s = JostSolver::new(&model, &grid, Default::default());
        [0.2, 1.0, 3.0]
            .iter()
            .map(|&k| {
                let c = s.solve_m(k);
                ((c.f0() * c.f0_prime().conj()).im + k).abs()
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (defect(1024), defect(2048));
    assert!(b < 1e-4);
    assert!((a / b).log2() > 1.8, "order {}", (a / b).log2());
}

#[test]
fn zero_energy_resonance_of_the_critical_coupling() {
    let grid = |r: f64| build_radial_grid(r, (r * 40.96) as usize, Grading::Uniform).unwrap();
    let model = aubin(1.0).build().unwrap();
    let mags: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&r| detect_resonance(&model, &grid(r), 1e-3).magnitude)
        .collect();
    assert!(mags[0] > mags[1] && mags[1] > mags[2]);
    assert!(detect_resonance(&model, &grid(200.0), 1e-3).resonant);
    let weak = aubin(0.5).build().unwrap();
    assert!(!detect_resonance(&weak, &grid(200.0), 1e-3).resonant);
    let free = PotentialSpec::Free.build().unwrap();
    assert!((detect_resonance(&free, &grid(50.0), 1e-3).magnitude - 1.0).abs() < 1e-14);
}

#[test]
fn bound_states_are_orthonormal_and_negative() {
    let model = aubin(1.0).build().unwrap();
    let grid = build_radial_grid(60.0, 2048, Grading::Uniform).unwrap();
    let set = find_bound_states(&model, &grid).unwrap();
    assert!(!set.is_empty());
    assert!(set.energies().iter().all(|&e| e < 0.0));
    assert!(set.orthonormality_defect(&grid) < 1e-8);
}

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use halfline::lp::{
    ap_ratio, ap_scan, estimate_opnorm, lp_norm, radial_lp_norm, standard_ap_family, test_family,
    ApStatus, TestInput,
};
use halfline::numerics::{build_radial_grid, Grading};

/// Average of `r^σ` on `[a, b]` by composite Gauss-Legendre in `log r`.
fn gl_average(sigma: f64, a: f64, b: f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(40).unwrap());
    let (la, lb) = (a.ln(), b.ln());
    let panels = 64;
    let h = (lb - la) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = la + i as f64 * h;
        total += rule.integrate(lo, lo + h, |t| (t * (sigma + 1.0)).exp());
    }
    total / (b - a)
}

#[test]
fn ap_ratio_matches_quadrature() {
    for &(s, p) in &[(0.4, 1.6), (-0.5, 2.5), (0.0, 2.0), (0.75, 1.25), (-1.2, 3.2)] {
        for &(a, b) in &[(0.01, 0.02), (0.5, 7.0), (1.0, 1.001), (3.0, 300.0)] {
            let got = ap_ratio(s, p, a, b).unwrap();
            let want = gl_average(s, a, b) * gl_average(-s / (p - 1.0), a, b).powf(p - 1.0);
            assert_eq!(got.status, ApStatus::Bounded);
            assert!(
                (got.value / want - 1.0).abs() < 1e-10,
                "s={s} p={p} [{a},{b}]: {} vs {want}",
                got.value
            );
        }
    }
}

#[test]
fn ap_ratio_near_origin_follows_closed_form() {
    // on [0, b] both averages are b^σ/(σ+1), so the ratio is scale free
    let (s, p) = (0.3, 2.0);
    let want = 1.0 / ((s + 1.0) * (1.0 - s));
    for b in [1e-3, 1.0, 1e3] {
        let got = ap_ratio(s, p, 0.0, b).unwrap().value;
        assert!((got / want - 1.0).abs() < 1e-13);
    }
}

#[test]
fn ap_scan_classifies_power_weights() {
    let fam = standard_ap_family();
    for p in [1.6, 2.0, 2.25, 2.8] {
        let scan = ap_scan(p, &fam).unwrap();
        assert!(!scan.divergent && scan.sup.is_finite() && scan.sup >= 1.0, "p={p}");
    }
    for p in [1.4, 1.5, 3.0, 3.25] {
        assert!(ap_scan(p, &fam).unwrap().divergent, "p={p}");
    }
    assert_eq!(ap_scan(1.5, &fam).unwrap().status, ApStatus::Logarithmic);
    assert_eq!(ap_scan(3.0, &fam).unwrap().status, ApStatus::Logarithmic);
    assert_eq!(ap_scan(3.25, &fam).unwrap().status, ApStatus::Divergent);
}

#[test]
fn unweighted_l2_matches_grid_norm() {
    let g = build_radial_grid(30.0, 900, Grading::Uniform).unwrap();
    let f = g.sample(|r| r * (-0.3 * r).exp() * (2.0 * r).sin());
    let a = lp_norm(&f, 2.0, &g, 0.0).unwrap();
    assert!((a - g.l2_norm(&f)).abs() <= 1e-12 * a);
}

#[test]
fn gaussian_moments() {
    let g = build_radial_grid(12.0, 4096, Grading::Uniform).unwrap();
    let u = g.sample(|r| (-r * r).exp());
    let reduced = g.sample(|r| r * (-r * r).exp());
    for p in [1.2_f64, 2.0, 2.5, 4.0] {
        // ∫ r² e^{−p r²} dr = √π / (4 p^{3/2})
        let moment = PI.sqrt() / (4.0 * p.powf(1.5));
        let three_d = (4.0 * PI * moment).powf(1.0 / p);
        let got = radial_lp_norm(&u, p, &g).unwrap();
        assert!((got / three_d - 1.0).abs() < 1e-8, "p={p}: {got} vs {three_d}");
        // u = f̃/r, so the 3D norm is (4π)^{1/p} times the weighted half-line norm
        let s = 2.0 / p - 1.0;
        let half = lp_norm(&reduced, p, &g, s).unwrap();
        assert!((half / moment.powf(1.0 / p) - 1.0).abs() < 1e-8);
        assert!(((4.0 * PI).powf(1.0 / p) * half / got - 1.0).abs() < 1e-8);
    }
}

#[test]
fn origin_node_of_negative_weights() {
    let g = build_radial_grid(10.0, 100, Grading::Uniform).unwrap();
    let mut f = g.sample(|r| r * (-r * r).exp());
    assert!(lp_norm(&f, 4.0, &g, -0.5).unwrap().is_finite());
    f[0] = 1e-16;
    assert!(lp_norm(&f, 4.0, &g, -0.5).unwrap().is_finite());
    assert!(lp_norm(&f, 4.0, &g, -1.0).unwrap().is_infinite());
}

#[test]
fn identity_has_unit_norm_and_families_only_raise_estimates() {
    let g = build_radial_grid(50.0, 2048, Grading::Uniform).unwrap();
    let fam = test_family(&g, 32.0, 3);
    for p in [1.3, 2.0, 3.5] {
        let s = 2.0 / p - 1.0;
        let est = estimate_opnorm(|fs| Ok(fs.to_vec()), p, s, &g, &fam).unwrap();
        assert!((est.bound - 1.0).abs() < 1e-14);
    }

    // T = multiplication by a bounded profile: adding members never lowers
    // the estimate
    let scale = |fs: &[Vec<f64>]| -> halfline::Result<Vec<Vec<f64>>> {
        Ok(fs
            .iter()
            .map(|f| f.iter().zip(g.nodes()).map(|(v, r)| v * (1.0 + (-r / 5.0).exp())).collect())
            .collect())
    };
    let mut prev = 0.0;
    for n in [3, 10, fam.len()] {
        let sub: Vec<TestInput> = fam[..n].to_vec();
        let est = estimate_opnorm(scale, 2.5, -0.2, &g, &sub).unwrap();
        assert!(est.bound >= prev && est.bound <= 2.0);
        prev = est.bound;
    }
}

#[test]
fn family_ids_are_unique_and_mixtures_are_seeded() {
    let g = build_radial_grid(100.0, 4096, Grading::Uniform).unwrap();
    let a = test_family(&g, 32.0, 7);
    let b = test_family(&g, 32.0, 7);
    let c = test_family(&g, 32.0, 8);
    let mut ids: Vec<&str> = a.iter().map(|m| m.id.as_str()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), a.len());
    assert!(a.iter().zip(&b).all(|(x, y)| x.samples == y.samples));
    let mix = a.iter().position(|m| m.id.starts_with("mix:")).unwrap();
    assert_ne!(a[mix].samples, c[mix].samples);
}

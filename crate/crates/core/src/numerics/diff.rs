use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::{Error, Result};

/// Scalars the stencils can act on.
pub trait Sample: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl Sample for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl Sample for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// Fornberg weights for derivatives `0..=m` at `x0` from nodes `xs`.
/// Row `d` holds the weights of the `d`-th derivative.
pub(crate) fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// First or second derivative of grid samples.
///
/// Interior nodes use the centered three-point stencil (second order on
/// non-uniform grids for the first derivative, and on smoothly graded grids
/// for the second). End nodes use one-sided stencils of the same order.
pub fn finite_difference<T: Sample>(nodes: &[f64], values: &[T], order: usize) -> Result<Vec<T>> {
    if !(order == 1 || order == 2) {
        return Err(Error::arg("order", format!("must be 1 or 2, got {order}")));
    }
    if nodes.len() < 5 {
        return Err(Error::InvalidGrid(format!(
            "finite differences need at least 5 nodes, got {}",
            nodes.len()
        )));
    }
    if nodes.len() != values.len() {
        return Err(Error::GridMismatch(format!(
            "{} values on {} nodes",
            values.len(),
            nodes.len()
        )));
    }
    let n = nodes.len();
    let apply = |i: usize, start: usize, len: usize| {
        let w = fornberg(nodes[i], &nodes[start..start + len], order);
        w[order]
            .iter()
            .zip(&values[start..start + len])
            .fold(T::zero(), |acc, (&c, &v)| acc + v * c)
    };
    let edge = order + 2;
    let mut out = Vec::with_capacity(n);
    out.push(apply(0, 0, edge));
    for i in 1..n - 1 {
        out.push(apply(i, i - 1, 3));
    }
    out.push(apply(n - 1, n - edge, edge));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * h).collect()
    }

    #[test]
    fn exact_on_quadratics() {
        let x = uniform(11, 0.1);
        let y: Vec<f64> = x.iter().map(|r| r * r).collect();
        let d = finite_difference(&x, &y, 1).unwrap();
        for (i, r) in x.iter().enumerate() {
            assert!((d[i] - 2.0 * r).abs() < 1e-12);
        }
        let d2 = finite_difference(&x, &y, 2).unwrap();
        assert!(d2.iter().all(|v| (v - 2.0).abs() < 1e-9));
    }

    #[test]
    fn constant_is_annihilated() {
        let x = uniform(8, 0.3);
        let y = vec![Complex64::new(2.0, -1.0); 8];
        for order in [1, 2] {
            let d = finite_difference(&x, &y, order).unwrap();
            assert!(d.iter().all(|v| v.norm() < 1e-12));
        }
    }

    #[test]
    fn second_order_convergence() {
        let mut errs = Vec::new();
        for h in [0.02, 0.01] {
            let n = (2.0 / h) as usize + 1;
            let x = uniform(n, h);
            let y: Vec<f64> = x.iter().map(|r| r.sin()).collect();
            let d = finite_difference(&x, &y, 2).unwrap();
            let i = (1.0 / h).round() as usize;
            errs.push((d[i] + 1f64.sin()).abs());
        }
        let ratio = errs[0] / errs[1];
        assert!(ratio > 3.8 && ratio < 4.2, "ratio {ratio}");
    }

    #[test]
    fn rejects_small_grids() {
        let x = uniform(4, 1.0);
        assert!(finite_difference(&x, &[0.0; 4], 1).is_err());
        let x = uniform(6, 1.0);
        assert!(finite_difference(&x, &[0.0; 6], 3).is_err());
    }
}

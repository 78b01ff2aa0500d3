use num_dual::{Dual3_64, DualNum};
use serde::{Deserialize, Serialize};

/// Beyond this exponent the logistic form of the transition is 0 or 1 in
/// double precision.
const EXP_CLAMP: f64 = 700.0;

/// Littlewood-Paley bump `ψ(k) = χ(k) − χ(2k)` built from the smooth step
/// `η(t) = g(t)/(g(t) + g(1−t))`, `g(t) = exp(−σ/t)`.
///
/// `χ(k) = η(2 − k)` equals 1 on `[0, 1]` and 0 on `[2, ∞)`, so `ψ` is
/// supported in `[1/2, 2]` and the dilates `ψ(2^{−j}·)` telescope to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub sharpness: f64,
}

impl Default for BumpFunction {
    fn default() -> Self {
        Self { sharpness: 1.0 }
    }
}

impl BumpFunction {
    /// The standard bump with `g(t) = exp(−1/t)`.
    pub fn lp_bump() -> Self {
        Self::default()
    }

    fn eta_generic<D: DualNum<Primitive = f64> + Copy>(&self, t: D) -> D {
        let x = t.re();
        if x <= 0.0 {
            return D::from(0.0);
        }
        if x >= 1.0 {
            return D::from(1.0);
        }
        let s = self.sharpness;
        let e = t.recip() * s - (-t + 1.0).recip() * s;
        if e.re() > EXP_CLAMP {
            D::from(0.0)
        } else if e.re() < -EXP_CLAMP {
            D::from(1.0)
        } else {
            (e.exp() + 1.0).recip()
        }
    }

    fn chi_generic<D: DualNum<Primitive = f64> + Copy>(&self, k: D) -> D {
        self.eta_generic(-k + 2.0)
    }

    fn psi_generic<D: DualNum<Primitive = f64> + Copy>(&self, k: D) -> D {
        self.chi_generic(k) - self.chi_generic(k * 2.0)
    }

    /// Smooth step, 0 for `t ≤ 0` and 1 for `t ≥ 1`.
    pub fn eta(&self, t: f64) -> f64 {
        self.eta_generic(t)
    }

    /// Smoothed indicator of `[0, 1]`, vanishing for `k ≥ 2`.
    pub fn chi(&self, k: f64) -> f64 {
        self.chi_generic(k)
    }

    pub fn psi(&self, k: f64) -> f64 {
        self.psi_generic(k)
    }

    /// `[χ, χ′, χ″, χ‴]` at `k`.
    pub fn chi_jet(&self, k: f64) -> [f64; 4] {
        jet(self.chi_generic(Dual3_64::from_re(k).derivative()))
    }

    /// `[ψ, ψ′, ψ″, ψ‴]` at `k`.
    pub fn psi_jet(&self, k: f64) -> [f64; 4] {
        jet(self.psi_generic(Dual3_64::from_re(k).derivative()))
    }
}

fn jet(d: Dual3_64) -> [f64; 4] {
    [d.re, d.v1, d.v2, d.v3]
}

/// Jet of `x ↦ f(c·x)` from the jet of `f` at `c·x`.
fn scale_jet(j: [f64; 4], c: f64) -> [f64; 4] {
    [j[0], c * j[1], c * c * j[2], c * c * c * j[3]]
}

/// Finite dyadic partition `{ψ(2^{−j}k)}_{j_min ≤ j ≤ j_max}` whose end
/// blocks absorb the tails, so the blocks sum to exactly 1 for every `k > 0`.
///
/// The low block is `Σ_{j ≤ j_min} ψ(2^{−j}k) = χ(2^{−j_min}k)` and the top
/// block is `Σ_{j ≥ j_max} ψ(2^{−j}k) = 1 − χ(2^{1−j_max}k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    pub bump: BumpFunction,
    pub j_min: i32,
    pub j_max: i32,
}

impl DyadicPartition {
    pub fn new(j_min: i32, j_max: i32) -> Self {
        Self {
            bump: BumpFunction::lp_bump(),
            j_min,
            j_max,
        }
    }

    pub fn blocks(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    /// Uncut dilate `ψ(2^{−j}k)`.
    pub fn genuine(&self, j: i32, k: f64) -> f64 {
        self.bump.psi(2f64.powi(-j) * k)
    }

    /// Block `j` with cumulative tails at both ends of the range.
    pub fn block(&self, j: i32, k: f64) -> f64 {
        self.block_jet(j, k)[0]
    }

    pub fn genuine_jet(&self, j: i32, k: f64) -> [f64; 4] {
        let c = 2f64.powi(-j);
        scale_jet(self.bump.psi_jet(c * k), c)
    }

    pub fn block_jet(&self, j: i32, k: f64) -> [f64; 4] {
        let low = j == self.j_min;
        let high = j == self.j_max;
        match (low, high) {
            (true, true) => [1.0, 0.0, 0.0, 0.0],
            (true, false) => {
                let c = 2f64.powi(-j);
                scale_jet(self.bump.chi_jet(c * k), c)
            }
            (false, true) => {
                let c = 2f64.powi(1 - j);
                let t = scale_jet(self.bump.chi_jet(c * k), c);
                [1.0 - t[0], -t[1], -t[2], -t[3]]
            }
            (false, false) => self.genuine_jet(j, k),
        }
    }

    /// Sum of all blocks at `k`; equals 1 up to rounding.
    pub fn total(&self, k: f64) -> f64 {
        self.blocks().map(|j| self.block(j, k)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn support_and_values() {
        let b = BumpFunction::lp_bump();
        assert_eq!(b.psi(3.0), 0.0);
        assert_eq!(b.psi(0.5), 0.0);
        assert_eq!(b.psi(0.25), 0.0);
        assert_eq!(b.psi(1.0), 1.0);
        assert_eq!(b.chi(0.7), 1.0);
        assert_eq!(b.chi(2.5), 0.0);
        assert_relative_eq!(b.eta(0.5), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn partition_identity_at_one() {
        let b = BumpFunction::lp_bump();
        let s: f64 = (-5..=5).map(|j| b.psi(2f64.powi(-j))).sum();
        assert_eq!(s, 1.0);
    }

    #[test]
    fn jets_match_finite_differences() {
        let b = BumpFunction::lp_bump();
        for &k in &[0.6, 0.9, 1.3, 1.7] {
            let j = b.psi_jet(k);
            let h = 1e-5;
            let jp = b.psi_jet(k + h);
            let jm = b.psi_jet(k - h);
            for l in 0..3 {
                let fd = (jp[l] - jm[l]) / (2.0 * h);
                assert!((fd - j[l + 1]).abs() < 1e-5 * (1.0 + j[l + 1].abs()));
            }
        }
    }

    #[test]
    fn cumulative_ends() {
        let p = DyadicPartition::new(-6, 4);
        for &k in &[1e-4, 2f64.powi(-7), 0.013, 0.5, 1.0, 3.3, 17.0, 31.9, 64.0, 1e3] {
            assert_relative_eq!(p.total(k), 1.0, epsilon = 1e-12);
        }
        let single = DyadicPartition::new(0, 0);
        assert_eq!(single.total(0.3), 1.0);
        let jet_sum: f64 = p.blocks().map(|j| p.block_jet(j, 1.37)[1]).sum();
        assert!(jet_sum.abs() < 1e-12);
    }
}

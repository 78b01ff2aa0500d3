//! Radial potentials `V(r)` with `|V| ≲ ⟨r⟩^{−β}` and `|V′| ≲ ⟨r⟩^{−β−1}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numerics::{fit_slope, RadialGrid};
use crate::{Error, Result};

/// Serializable recipe for a potential, as stored in run configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Free,
    Aubin {
        a: f64,
        #[serde(default = "one")]
        strength: f64,
    },
    Table {
        path: String,
    },
}

fn one() -> f64 {
    1.0
}

impl PotentialSpec {
    pub fn build(&self) -> Result<PotentialModel> {
        match self {
            PotentialSpec::Free => Ok(PotentialModel::free()),
            PotentialSpec::Aubin { a, strength } => Ok(aubin_potential(*a)?.scaled(*strength)),
            PotentialSpec::Table { path } => load_tabulated_potential(path),
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Free,
    Aubin { a: f64 },
    Tabulated(NaturalSpline),
}

/// Real radial potential with its claimed decay exponent.
#[derive(Debug, Clone)]
pub struct PotentialModel {
    shape: Shape,
    strength: f64,
    beta: f64,
    label: String,
}

impl PotentialModel {
    pub fn free() -> Self {
        Self {
            shape: Shape::Free,
            strength: 1.0,
            beta: f64::INFINITY,
            label: "free".into(),
        }
    }

    /// Cubic-spline potential through `(r, v)`; zero outside the table.
    pub fn tabulated(r: Vec<f64>, v: Vec<f64>, beta: f64, label: impl Into<String>) -> Result<Self> {
        Ok(Self {
            shape: Shape::Tabulated(NaturalSpline::new(r, v)?),
            strength: 1.0,
            beta,
            label: label.into(),
        })
    }

    /// `λ·V`, keeping the decay exponent.
    pub fn scaled(mut self, lambda: f64) -> Self {
        self.strength *= lambda;
        if lambda != 1.0 {
            self.label = format!("{lambda}*{}", self.label);
        }
        self
    }

    /// Same potential declared with another decay exponent.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn value(&self, r: f64) -> f64 {
        self.strength
            * match &self.shape {
                Shape::Free => 0.0,
                Shape::Aubin { a } => -15.0 * a / (1.0 + a * r * r).powi(2),
                Shape::Tabulated(s) => s.eval(r).0,
            }
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.strength
            * match &self.shape {
                Shape::Free => 0.0,
                Shape::Aubin { a } => 60.0 * a * a * r / (1.0 + a * r * r).powi(3),
                Shape::Tabulated(s) => s.eval(r).1,
            }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_free(&self) -> bool {
        matches!(self.shape, Shape::Free) || self.strength == 0.0
    }

    /// `∫_{r_max}^∞ r|V(r)| dr`: closed form for the Aubin family, a power-law
    /// extrapolation from the last sample otherwise.
    pub fn tail_error(&self, r_max: f64) -> f64 {
        let s = self.strength.abs();
        match &self.shape {
            Shape::Free => 0.0,
            Shape::Aubin { a } => s * 15.0 / (2.0 * (1.0 + a * r_max * r_max)),
            Shape::Tabulated(spline) => {
                let end = spline.r_end();
                if r_max >= end || self.beta <= 2.0 {
                    return if r_max >= end { 0.0 } else { f64::INFINITY };
                }
                s * spline.eval(r_max).0.abs() * r_max * r_max / (self.beta - 2.0)
            }
        }
    }

    pub fn sample(&self, grid: &RadialGrid) -> Vec<f64> {
        grid.sample(|r| self.value(r))
    }

    /// `∫₀^{r_max} r|V| dr` on the grid.
    pub fn first_moment(&self, grid: &RadialGrid) -> f64 {
        grid.integrate(&grid.sample(|r| r * self.value(r).abs()))
    }
}

/// The radial linearization potential `−5φ⁴(r, a) = −15a(1+ar²)^{−2}`.
pub fn aubin_potential(a: f64) -> Result<PotentialModel> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::arg("a", format!("Aubin scale must be positive, got {a}")));
    }
    Ok(PotentialModel {
        shape: Shape::Aubin { a },
        strength: 1.0,
        beta: 4.0,
        label: format!("aubin(a={a})"),
    })
}

/// `φ(r, a) = (3a)^{1/4}(1 + ar²)^{−1/2}`.
pub fn eval_phi(r: f64, a: f64) -> f64 {
    (3.0 * a).powf(0.25) / (1.0 + a * r * r).sqrt()
}

/// `∂ₐφ(r, a) = (3a)^{1/4}(1 − ar²) / (4a(1 + ar²)^{3/2})`.
pub fn eval_dphi_da(r: f64, a: f64) -> f64 {
    let q = 1.0 + a * r * r;
    (3.0 * a).powf(0.25) * (1.0 - a * r * r) / (4.0 * a * q * q.sqrt())
}

/// Reads a two-column `r V` table with a `# beta=<float>` header.
pub fn load_tabulated_potential(path: impl AsRef<Path>) -> Result<PotentialModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let (r, v, beta) = parse_table(&text)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "table".into());
    PotentialModel::tabulated(r, v, beta, label)
}

fn parse_table(text: &str) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let mut beta = None;
    let mut r = Vec::new();
    let mut v = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.trim();
        if s.is_empty() {
            continue;
        }
        if let Some(comment) = s.strip_prefix('#') {
            if let Some(val) = comment.trim().strip_prefix("beta=") {
                let b = val.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line,
                    reason: format!("bad beta value {val:?}: {e}"),
                })?;
                beta = Some(b);
            }
            continue;
        }
        let cols: Vec<&str> = s.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(Error::Parse {
                line,
                reason: format!("expected two columns `r V`, found {}", cols.len()),
            });
        }
        let parse = |c: &str| {
            c.parse::<f64>().map_err(|e| Error::Parse {
                line,
                reason: format!("not a number {c:?}: {e}"),
            })
        };
        let (ri, vi) = (parse(cols[0])?, parse(cols[1])?);
        if let Some(&last) = r.last() {
            if ri <= last {
                return Err(Error::Parse {
                    line,
                    reason: format!("r must increase strictly, {ri} follows {last}"),
                });
            }
        }
        r.push(ri);
        v.push(vi);
    }
    let beta = beta.ok_or(Error::Parse {
        line: 1,
        reason: "missing `# beta=<float>` header".into(),
    })?;
    if r.len() < 4 {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            reason: format!("need at least 4 rows for a cubic interpolant, found {}", r.len()),
        });
    }
    Ok((r, v, beta))
}

/// Natural cubic spline; evaluates to zero outside its nodes.
#[derive(Debug, Clone)]
struct NaturalSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(Error::arg(
                "table",
                format!("need at least 4 matching (r, V) pairs, got {n}"),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::arg("table", "r must increase strictly"));
        }
        // Thomas algorithm for the second derivatives, m₀ = m_{n−1} = 0.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        Ok(Self { x, y, m })
    }

    fn r_end(&self) -> f64 {
        *self.x.last().expect("non-empty spline")
    }

    /// Value and first derivative.
    fn eval(&self, t: f64) -> (f64, f64) {
        let n = self.x.len();
        if t < self.x[0] || t > self.x[n - 1] {
            return (0.0, 0.0);
        }
        let i = self.x.partition_point(|&xi| xi <= t).clamp(1, n - 1) - 1;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let val = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let der = (self.y[i + 1] - self.y[i]) / h
            + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        (val, der)
    }
}

/// Outcome of [`check_decay`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub c_v: f64,
    pub c_dv: f64,
    /// Log-log slope of `⟨r⟩^β|V|` over `[r_max/10, r_max]`; a declared
    /// exponent that is too large shows up as a positive slope.
    pub growth_slope: f64,
    pub pass: bool,
}

/// Largest tolerated log-slope of `⟨r⟩^β|V|` on the outer decade.
pub const DECAY_SLOPE_TOL: f64 = 0.05;

/// Samples `⟨r⟩^β|V|` and `⟨r⟩^{β+1}|V′|` on the grid.
pub fn check_decay(p: &PotentialModel, grid: &RadialGrid) -> DecayReport {
    let beta = p.beta();
    if p.is_free() {
        return DecayReport {
            c_v: 0.0,
            c_dv: 0.0,
            growth_slope: 0.0,
            pass: true,
        };
    }
    let bracket = |r: f64| (1.0 + r * r).sqrt();
    let mut c_v = 0.0_f64;
    let mut c_dv = 0.0_f64;
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for &r in grid.nodes() {
        let wv = bracket(r).powf(beta) * p.value(r).abs();
        let wd = bracket(r).powf(beta + 1.0) * p.derivative(r).abs();
        c_v = c_v.max(wv);
        c_dv = c_dv.max(wd);
        if r >= grid.r_max() / 10.0 && wv > 0.0 {
            lx.push(r.ln());
            ly.push(wv.ln());
        }
    }
    let growth_slope = if lx.len() >= 2 { fit_slope(&lx, &ly) } else { 0.0 };
    let pass =
        c_v.is_finite() && c_dv.is_finite() && beta > 3.0 && growth_slope <= DECAY_SLOPE_TOL;
    DecayReport {
        c_v,
        c_dv,
        growth_slope,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{build_radial_grid, Grading};
    use approx::assert_relative_eq;

    #[test]
    fn aubin_values() {
        let v = aubin_potential(1.0).unwrap();
        assert_eq!(v.value(0.0), -15.0);
        assert_eq!(v.value(1.0), -15.0 / 4.0);
        assert_eq!(v.beta(), 4.0);
        assert!(aubin_potential(0.0).is_err());
        assert!(aubin_potential(-1.0).is_err());
        assert_relative_eq!(eval_phi(0.0, 2.0), 6f64.powf(0.25));
    }

    #[test]
    fn aubin_potential_is_minus_five_phi_to_the_fourth() {
        for &a in &[0.5, 1.0, 2.0] {
            let v = aubin_potential(a).unwrap();
            for &r in &[0.0, 0.3, 1.7, 12.0] {
                assert_relative_eq!(v.value(r), -5.0 * eval_phi(r, a).powi(4), max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn spline_reproduces_cubic() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t - 1.0).collect();
        let s = NaturalSpline::new(x, y).unwrap();
        let (v, d) = s.eval(1.234);
        assert_relative_eq!(v, 2.0 * 1.234 - 1.0, epsilon = 1e-12);
        assert_relative_eq!(d, 2.0, epsilon = 1e-12);
        assert_eq!(s.eval(5.0), (0.0, 0.0));
    }

    #[test]
    fn table_parse_errors() {
        assert!(parse_table("").is_err());
        assert!(parse_table("# beta=4\n1 2\n").is_err());
        assert!(parse_table("0 1\n1 2\n2 3\n3 4\n").is_err());
        assert!(parse_table("# beta=4\n0 1\n1 2\n0.5 3\n3 4\n").is_err());
        assert!(parse_table("# beta=4\n0 1\n1 x\n2 3\n3 4\n").is_err());
        let (r, _, b) = parse_table("# beta=4.5\n0 1\n1 2\n\n2 3\n3 4\n").unwrap();
        assert_eq!((r.len(), b), (4, 4.5));
    }

    #[test]
    fn decay_certificates() {
        let g = build_radial_grid(200.0, 4096, Grading::Uniform).unwrap();
        let free = check_decay(&PotentialModel::free(), &g);
        assert!(free.pass && free.c_v == 0.0);
        let rep = check_decay(&aubin_potential(1.0).unwrap(), &g);
        assert!(rep.pass);
        assert_relative_eq!(rep.c_v, 15.0, max_relative = 1e-12);
        let bad = check_decay(&aubin_potential(1.0).unwrap().with_beta(4.5), &g);
        assert!(!bad.pass);
    }

    #[test]
    fn spec_round_trip() {
        let s = PotentialSpec::Aubin { a: 1.0, strength: 0.5 };
        let json = serde_json::to_string(&s).unwrap();
        let back: PotentialSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
        let v = back.build().unwrap();
        assert_eq!(v.value(0.0), -7.5);
        let d: PotentialSpec = serde_json::from_str(r#"{"kind":"aubin","a":2.0}"#).unwrap();
        assert_eq!(d, PotentialSpec::Aubin { a: 2.0, strength: 1.0 });
    }
}

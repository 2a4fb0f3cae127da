//! Kernel positivity certificates: a lower bound `delta > 0` and an
//! integrable envelope `phi` with
//! `delta <= k(x,y) / d(x) <= phi(y)` on the unit square.
//!
//! Certificates make rejection sampling of the transition law exact (the
//! envelope is a valid proposal with acceptance ratio at most one) and feed
//! the Poisson-approximation pair bounds. Every built-in kernel family with
//! strictly positive values ships an analytic, tight certificate.

use crate::error::{Error, Result};
use crate::graphon::{Graphon, Kernel};

/// Envelope functions with closed-form antiderivatives and quantiles.
#[derive(Debug, Clone)]
pub enum Phi {
    /// `phi(y) = a + b y`, nonnegative on `[0,1]`.
    Linear { a: f64, b: f64 },
    /// Piecewise constant on the partition `cuts`.
    PiecewiseConst { cuts: Vec<f64>, values: Vec<f64> },
}

impl Phi {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Phi::Linear { a, b } => a + b * y,
            Phi::PiecewiseConst { cuts, values } => {
                let idx = cuts.partition_point(|&c| c <= y);
                values[idx.saturating_sub(1).min(values.len() - 1)]
            }
        }
    }

    /// `int_lo^hi phi(y) dy` in closed form.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Phi::Linear { a, b } => a * (hi - lo) + b * (hi * hi - lo * lo) / 2.0,
            Phi::PiecewiseConst { cuts, values } => values
                .iter()
                .enumerate()
                .map(|(q, v)| v * (hi.min(cuts[q + 1]) - lo.max(cuts[q])).max(0.0))
                .sum(),
        }
    }

    /// `int_{A_{n,i}} phi` for the equal partition (0-based `i`).
    pub fn bin_integral(&self, n: usize, i: usize) -> f64 {
        self.integral(i as f64 / n as f64, (i + 1) as f64 / n as f64)
    }

    /// `int_0^1 phi`.
    pub fn total(&self) -> f64 {
        self.integral(0.0, 1.0)
    }

    /// Quantile of the normalized density `phi / total` at `u` in `[0,1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            Phi::Linear { a, b } => {
                let target = u * self.total();
                // root of (b/2) t^2 + a t - target, written without cancellation
                let disc = (a * a + 2.0 * b * target).max(0.0);
                let denom = a + disc.sqrt();
                if denom <= 0.0 {
                    return u; // phi vanishes identically on an initial segment
                }
                (2.0 * target / denom).clamp(0.0, 1.0)
            }
            Phi::PiecewiseConst { cuts, values } => {
                let target = u * self.total();
                let mut acc = 0.0;
                for (q, &v) in values.iter().enumerate() {
                    let w = cuts[q + 1] - cuts[q];
                    if acc + v * w >= target && v > 0.0 {
                        return (cuts[q] + (target - acc) / v).clamp(0.0, 1.0);
                    }
                    acc += v * w;
                }
                1.0
            }
        }
    }
}

/// A `(delta, phi)` pair certifying the positivity assumption for a kernel.
#[derive(Debug, Clone)]
pub struct K1Certificate {
    delta: f64,
    phi: Phi,
}

impl K1Certificate {
    pub fn new(delta: f64, phi: Phi) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidKernel(format!(
                "certificate lower bound delta = {delta} must be positive"
            )));
        }
        Ok(Self { delta, phi })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn phi(&self) -> &Phi {
        &self.phi
    }

    pub fn phi_total(&self) -> f64 {
        self.phi.total()
    }
}

/// Outcome of checking a certificate against a kernel on a midpoint grid.
#[derive(Debug, Clone, Copy)]
pub struct K1Report {
    /// Smallest ratio `k(x,y)/d(x)` seen.
    pub min_ratio: f64,
    /// Largest excess over either bound (0 when the certificate holds);
    /// infinite when the degree vanishes at a grid point.
    pub max_violation: f64,
    pub pass: bool,
}

const K1_TOLERANCE: f64 = 1e-12;

/// Evaluate `r(x,y) = k(x,y)/d(x)` on a `grid x grid` lattice of cell
/// midpoints and check `delta <= r <= phi(y)` within `1e-12`. A vanishing
/// degree is reported as a failed certificate, not an error.
pub fn verify_k1(g: &Graphon, cert: &K1Certificate, grid: usize) -> K1Report {
    assert!(grid >= 2, "verification grid must have at least 2 points");
    let mut min_ratio = f64::INFINITY;
    let mut max_violation: f64 = 0.0;
    for j in 0..grid {
        let y = (j as f64 + 0.5) / grid as f64;
        let phi_y = cert.phi.eval(y);
        max_violation = max_violation.max(cert.delta - phi_y);
        for i in 0..grid {
            let x = (i as f64 + 0.5) / grid as f64;
            let d = g.degree_at(x);
            if d <= 0.0 {
                return K1Report {
                    min_ratio: 0.0,
                    max_violation: f64::INFINITY,
                    pass: false,
                };
            }
            let r = g.value_at(x, y) / d;
            min_ratio = min_ratio.min(r);
            max_violation = max_violation.max(cert.delta - r).max(r - phi_y);
        }
    }
    K1Report {
        min_ratio,
        max_violation: max_violation.max(0.0),
        pass: max_violation <= K1_TOLERANCE,
    }
}

impl Graphon {
    /// The tight analytic certificate of a built-in kernel, or `None` when
    /// the kernel touches zero (the positivity assumption fails) or has no
    /// closed form.
    pub fn analytic_certificate(&self) -> Option<K1Certificate> {
        match self.kind() {
            Kernel::Constant(c) => {
                if *c > 0.0 {
                    K1Certificate::new(1.0, Phi::Linear { a: 1.0, b: 0.0 }).ok()
                } else {
                    None
                }
            }
            // ratio = f(y) / F with F = a + b/2: the envelope is tight
            Kernel::Product { a, b } => {
                let f_total = a + b / 2.0;
                let f_min = a.min(a + b);
                if f_min <= 0.0 || f_total <= 0.0 {
                    return None;
                }
                K1Certificate::new(
                    f_min / f_total,
                    Phi::Linear { a: a / f_total, b: b / f_total },
                )
                .ok()
            }
            Kernel::Block { cuts, values } => {
                block_certificate(cuts, values)
            }
            Kernel::Step(s) => {
                let cuts: Vec<f64> = (0..=s.n()).map(|k| k as f64 / s.n() as f64).collect();
                block_certificate(&cuts, s.values())
            }
            Kernel::Scaled { inner, .. } => inner.analytic_certificate(),
            Kernel::Poissonized { .. } => None,
        }
    }
}

/// Ratios of a block kernel are block-constant: `r(x,y) = V_pq / d_p`.
fn block_certificate(cuts: &[f64], values: &[f64]) -> Option<K1Certificate> {
    let b = cuts.len() - 1;
    let widths: Vec<f64> = (0..b).map(|q| cuts[q + 1] - cuts[q]).collect();
    let row_mass: Vec<f64> = (0..b)
        .map(|p| (0..b).map(|q| values[p * b + q] * widths[q]).sum())
        .collect();
    if row_mass.iter().any(|&d| d <= 0.0) {
        return None;
    }
    let mut delta = f64::INFINITY;
    let mut phi_vals = vec![0.0f64; b];
    for p in 0..b {
        for q in 0..b {
            let r = values[p * b + q] / row_mass[p];
            delta = delta.min(r);
            phi_vals[q] = phi_vals[q].max(r);
        }
    }
    if delta <= 0.0 {
        return None;
    }
    K1Certificate::new(delta, Phi::PiecewiseConst { cuts: cuts.to_vec(), values: phi_vals }).ok()
}

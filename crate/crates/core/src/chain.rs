//! Seeded realizations of the stationary, time-reversible Markov chain
//! attached to a kernel: the transition law from `x` has density
//! `k(x,y) / d(x)` and the initial point is drawn from the stationary
//! density `d(x) / ||k||_1`.
//!
//! Three interchangeable transition samplers are provided. `Exact` inverts
//! the transition CDF in closed form (available for every built-in
//! family). `Rejection` proposes from the certificate envelope `phi` and
//! accepts with probability `k(x,y) / (d(x) phi(y))`, which the
//! certificate guarantees is at most one. `Grid` inverts the CDF of the
//! bin-mass discretization on `m` cells, with an `O(1/m)` bias; when the
//! grid is aligned with the oracle bins the discretized chain is exactly
//! the model the finite-chain oracles compute with.

use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphon::{block_of, Graphon, Kernel};

/// Cap on rejection trials per draw before declaring the certificate wrong.
const MAX_REJECTION_TRIALS: u64 = 1_000_000;

/// Default cell count of the grid sampler.
pub const DEFAULT_GRID_RESOLUTION: usize = 1024;

/// How transitions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerMethod {
    /// Closed-form inverse CDF; available for the built-in kernel families.
    Exact,
    /// Envelope rejection from the kernel's analytic certificate.
    Rejection,
    /// Inverse CDF of the `m`-cell bin-mass discretization.
    Grid { m: usize },
}

impl SamplerMethod {
    pub fn grid_default() -> Self {
        SamplerMethod::Grid { m: DEFAULT_GRID_RESOLUTION }
    }

    fn name(&self) -> String {
        match self {
            SamplerMethod::Exact => "exact".into(),
            SamplerMethod::Rejection => "rejection".into(),
            SamplerMethod::Grid { m } => format!("grid:{m}"),
        }
    }
}

/// A seeded realization `X_0, ..., X_N` of the stationary chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrajectory {
    pub seed: u64,
    pub kernel_id: String,
    points: Vec<f64>,
}

impl ChainTrajectory {
    /// Wrap an explicit point sequence, e.g. a replayed dump. All points
    /// must lie in the unit interval and there must be at least one.
    pub fn from_points(seed: u64, kernel_id: String, points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidKernel("a trajectory needs at least one point".into()));
        }
        if let Some(&bad) = points.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::OutOfRange { what: "trajectory point", value: bad });
        }
        Ok(Self { seed, kernel_id, points })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of transitions, i.e. `N` for `N + 1` stored points.
    pub fn n_steps(&self) -> usize {
        self.points.len() - 1
    }

    /// Dump as CSV with header `m,x`, one row per point.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("m,x\n");
        for (m, x) in self.points.iter().enumerate() {
            out.push_str(&format!("{m},{x}\n"));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Invert the mixed categorical/uniform CDF that is piecewise linear over
/// `cuts` with cell probabilities `probs` (summing to one).
fn invert_piecewise(cuts: &[f64], probs: &[f64], u: f64) -> f64 {
    let mut acc = 0.0;
    for (q, &p) in probs.iter().enumerate() {
        if p > 0.0 && u <= acc + p {
            let frac = (u - acc) / p;
            return (cuts[q] + frac * (cuts[q + 1] - cuts[q])).clamp(0.0, 1.0);
        }
        acc += p;
    }
    1.0
}

fn equal_cuts(n: usize) -> Vec<f64> {
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

/// One draw from the stationary density `d(x) / ||k||_1`, by closed-form
/// inverse CDF.
pub fn sample_initial(g: &Graphon, rng: &mut impl Rng) -> Result<f64> {
    let mass = g.total_mass()?;
    let u: f64 = rng.random();
    match g.kind() {
        Kernel::Constant(_) => Ok(u),
        // stationary density is f(x) / F, the same shape as the factor
        Kernel::Product { a, b } => {
            let phi = crate::k1::Phi::Linear { a: *a, b: *b };
            Ok(phi.quantile(u))
        }
        Kernel::Block { cuts, values } => {
            let b = cuts.len() - 1;
            let probs: Vec<f64> = (0..b)
                .map(|p| {
                    let width = cuts[p + 1] - cuts[p];
                    let d: f64 =
                        (0..b).map(|q| values[p * b + q] * (cuts[q + 1] - cuts[q])).sum();
                    width * d / mass
                })
                .collect();
            Ok(invert_piecewise(cuts, &probs, u))
        }
        Kernel::Step(s) => {
            let n = s.n();
            let total: f64 = s.values().iter().sum();
            let probs: Vec<f64> =
                (0..n).map(|i| (0..n).map(|j| s.get(i, j)).sum::<f64>() / total).collect();
            Ok(invert_piecewise(&equal_cuts(n), &probs, u))
        }
        Kernel::Scaled { inner, .. } => sample_initial(inner, rng),
        Kernel::Poissonized { .. } => Err(Error::UnsupportedMethod {
            method: "initial inverse CDF".into(),
            kernel: g.id(),
        }),
    }
}

/// One draw from the transition density `k(x, .) / d(x)`.
pub fn sample_transition(
    g: &Graphon,
    x: f64,
    method: SamplerMethod,
    rng: &mut impl Rng,
) -> Result<f64> {
    let d = g.degree(x)?;
    if d <= 0.0 {
        return Err(Error::InvalidKernel(format!("degree vanishes at x = {x}")));
    }
    match method {
        SamplerMethod::Exact => exact_transition(g, x, d, rng),
        SamplerMethod::Rejection => {
            let cert = g.analytic_certificate().ok_or_else(|| Error::UnsupportedMethod {
                method: method.name(),
                kernel: g.id(),
            })?;
            sample_transition_rejection(g, x, &cert, rng)
        }
        SamplerMethod::Grid { m } => {
            if m == 0 {
                return Err(Error::OutOfRange { what: "grid resolution", value: 0.0 });
            }
            let masses = g.slice_masses(x, m);
            let total: f64 = masses.iter().sum();
            let probs: Vec<f64> = masses.iter().map(|w| w / total).collect();
            Ok(invert_piecewise(&equal_cuts(m), &probs, rng.random()))
        }
    }
}

/// Rejection transition draw with an explicit envelope certificate: the
/// proposal is `phi / int phi` and the acceptance ratio
/// `k(x,y) / (d(x) phi(y))` never exceeds one for a valid certificate.
/// Errors after a million straight rejections, which means the envelope
/// does not actually dominate the kernel.
pub fn sample_transition_rejection(
    g: &Graphon,
    x: f64,
    cert: &crate::k1::K1Certificate,
    rng: &mut impl Rng,
) -> Result<f64> {
    let d = g.degree(x)?;
    if d <= 0.0 {
        return Err(Error::InvalidKernel(format!("degree vanishes at x = {x}")));
    }
    for _ in 0..MAX_REJECTION_TRIALS {
        let y = cert.phi().quantile(rng.random());
        let accept: f64 = rng.random();
        if accept * d * cert.phi().eval(y) <= g.value_at(x, y) {
            return Ok(y);
        }
    }
    Err(Error::CertificateViolation { trials: MAX_REJECTION_TRIALS })
}

fn exact_transition(g: &Graphon, x: f64, d: f64, rng: &mut impl Rng) -> Result<f64> {
    let u: f64 = rng.random();
    match g.kind() {
        Kernel::Constant(_) => Ok(u),
        // the conditional density f(y)/F does not depend on x
        Kernel::Product { a, b } => {
            let phi = crate::k1::Phi::Linear { a: *a, b: *b };
            Ok(phi.quantile(u))
        }
        Kernel::Block { cuts, values } => {
            let b = cuts.len() - 1;
            let p = block_of(cuts, x);
            let probs: Vec<f64> =
                (0..b).map(|q| values[p * b + q] * (cuts[q + 1] - cuts[q]) / d).collect();
            Ok(invert_piecewise(cuts, &probs, u))
        }
        Kernel::Step(s) => {
            let n = s.n();
            let i = crate::graph::bin_index0(x, n);
            let row: f64 = (0..n).map(|j| s.get(i, j)).sum();
            let probs: Vec<f64> = (0..n).map(|j| s.get(i, j) / row).collect();
            Ok(invert_piecewise(&equal_cuts(n), &probs, u))
        }
        Kernel::Scaled { inner, .. } => {
            let d_inner = inner.degree(x)?;
            exact_transition(inner, x, d_inner, rng)
        }
        Kernel::Poissonized { .. } => Err(Error::UnsupportedMethod {
            method: "exact".into(),
            kernel: g.id(),
        }),
    }
}

/// Sample `X_0, ..., X_N` with `X_0` stationary; fully deterministic given
/// `(kernel, n_steps, seed, method)`.
pub fn sample_trajectory(
    g: &Graphon,
    n_steps: usize,
    seed: u64,
    method: SamplerMethod,
) -> Result<ChainTrajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut x = sample_initial(g, &mut rng)?;
    points.push(x);
    for _ in 0..n_steps {
        x = sample_transition(g, x, method, &mut rng)?;
        points.push(x);
    }
    Ok(ChainTrajectory { seed, kernel_id: g.id(), points })
}

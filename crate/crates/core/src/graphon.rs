//! Graphon kernels: analytic families, step functions, norms, bin
//! averages, normalization, and Poissonization.
//!
//! A graphon here is a symmetric, nonnegative, integrable function on the
//! unit square. The built-in families (constant, product, block, step)
//! carry closed forms for every integral this crate needs, which keeps the
//! downstream oracles exact. Kernels produced by [`Graphon::poissonize`]
//! on a product kernel fall back to midpoint tensor quadrature with a
//! documented `O(q^-2)` error for smooth integrands.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::step::StepGraphon;

/// Midpoint quadrature resolution per bin for kernels without closed forms.
pub const QUAD_POINTS_PER_BIN: usize = 32;

/// Resolution used when integrating wrapped kernels over the whole square.
const MASS_QUAD_RESOLUTION: usize = 512;

/// The kernel families. `Constant`, `Product`, `Block` and `Step` are the
/// built-ins with closed-form integrals; `Poissonized` and `Scaled` wrap
/// another kernel pointwise.
#[derive(Debug, Clone)]
pub enum Kernel {
    /// `k(x,y) = c`.
    Constant(f64),
    /// `k(x,y) = f(x) f(y)` with `f(x) = a + b x`, nonnegative on `[0,1]`.
    Product { a: f64, b: f64 },
    /// Constant value `values[p][q]` on `B_p x B_q` for the partition given
    /// by `cuts` (half-open blocks, the last one closed).
    Block { cuts: Vec<f64>, values: Vec<f64> },
    /// A step graphon on the equal partition.
    Step(StepGraphon),
    /// `rate^-1 (1 - exp(-rate * inner(x,y)))`.
    Poissonized { inner: Box<Graphon>, rate: f64 },
    /// `factor * inner(x,y)`.
    Scaled { inner: Box<Graphon>, factor: f64 },
}

/// An immutable graphon kernel. All operations are pure.
#[derive(Debug, Clone)]
pub struct Graphon {
    kind: Kernel,
}

/// The Poissonization map `v -> rate^-1 (1 - e^{-rate v})`, evaluated in a
/// cancellation-free form. Fixes `0 -> 0` and tends to `v` as `rate -> 0`.
pub fn poissonize_value(v: f64, rate: f64) -> f64 {
    -((-rate * v).exp_m1()) / rate
}

fn check_unit(what: &'static str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange { what, value: v });
    }
    Ok(())
}

impl Graphon {
    /// The constant kernel `k = c`, `c >= 0`.
    pub fn constant(c: f64) -> Result<Self> {
        if !c.is_finite() || c < 0.0 {
            return Err(Error::InvalidKernel(format!("constant value {c} must be nonnegative")));
        }
        Ok(Self { kind: Kernel::Constant(c) })
    }

    /// The product kernel `k(x,y) = (a + bx)(a + by)`. The factor must be
    /// nonnegative on `[0,1]`, which for a linear factor means nonnegative
    /// endpoints.
    pub fn product(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a < 0.0 || a + b < 0.0 {
            return Err(Error::InvalidKernel(format!(
                "product factor {a} + {b} x must be nonnegative on [0,1]"
            )));
        }
        Ok(Self { kind: Kernel::Product { a, b } })
    }

    /// A block kernel on the partition `cuts[0]=0 < ... < cuts[B]=1` with a
    /// symmetric nonnegative `B x B` value matrix.
    pub fn block(cuts: Vec<f64>, rows: &[Vec<f64>]) -> Result<Self> {
        if cuts.len() < 2 || cuts[0] != 0.0 || *cuts.last().unwrap() != 1.0 {
            return Err(Error::InvalidKernel("cuts must start at 0 and end at 1".into()));
        }
        if cuts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKernel("cuts must be strictly increasing".into()));
        }
        let b = cuts.len() - 1;
        if rows.len() != b || rows.iter().any(|r| r.len() != b) {
            return Err(Error::InvalidKernel(format!("value matrix must be {b} x {b}")));
        }
        let mut values = vec![0.0; b * b];
        for (p, row) in rows.iter().enumerate() {
            for (q, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidKernel(format!(
                        "block value ({p},{q}) = {v} must be nonnegative"
                    )));
                }
                if (v - rows[q][p]).abs() > 1e-12 {
                    return Err(Error::InvalidKernel("block values must be symmetric".into()));
                }
                values[p * b + q] = v;
            }
        }
        Ok(Self { kind: Kernel::Block { cuts, values } })
    }

    /// Wrap a step graphon as a kernel on the equal partition.
    pub fn step(s: StepGraphon) -> Self {
        Self { kind: Kernel::Step(s) }
    }

    pub fn kind(&self) -> &Kernel {
        &self.kind
    }

    /// Evaluate `k(x,y)`. Symmetric in its arguments.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        check_unit("x", x)?;
        check_unit("y", y)?;
        Ok(self.value_at(x, y))
    }

    pub(crate) fn value_at(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            Kernel::Constant(c) => *c,
            Kernel::Product { a, b } => (a + b * x) * (a + b * y),
            Kernel::Block { cuts, values } => {
                let b = cuts.len() - 1;
                values[block_of(cuts, x) * b + block_of(cuts, y)]
            }
            Kernel::Step(s) => s.eval(x, y),
            Kernel::Poissonized { inner, rate } => poissonize_value(inner.value_at(x, y), *rate),
            Kernel::Scaled { inner, factor } => factor * inner.value_at(x, y),
        }
    }

    /// The degree function `d(x) = int_0^1 k(x,z) dz`. Closed form for the
    /// built-in kinds, quadrature for Poissonized wrappers.
    pub fn degree(&self, x: f64) -> Result<f64> {
        check_unit("x", x)?;
        Ok(self.degree_at(x))
    }

    pub(crate) fn degree_at(&self, x: f64) -> f64 {
        match &self.kind {
            Kernel::Constant(c) => *c,
            Kernel::Product { a, b } => (a + b * x) * (a + b / 2.0),
            Kernel::Block { cuts, values } => {
                let b = cuts.len() - 1;
                let p = block_of(cuts, x);
                (0..b).map(|q| values[p * b + q] * (cuts[q + 1] - cuts[q])).sum()
            }
            Kernel::Step(s) => {
                let n = s.n();
                let i = crate::graph::bin_index0(x, n);
                (0..n).map(|j| s.get(i, j)).sum::<f64>() / n as f64
            }
            Kernel::Poissonized { .. } => {
                let q = 4096;
                (0..q).map(|k| self.value_at(x, (k as f64 + 0.5) / q as f64)).sum::<f64>()
                    / q as f64
            }
            Kernel::Scaled { inner, factor } => factor * inner.degree_at(x),
        }
    }

    pub(crate) fn mass_raw(&self) -> f64 {
        match &self.kind {
            Kernel::Constant(c) => *c,
            Kernel::Product { a, b } => {
                let f = a + b / 2.0;
                f * f
            }
            Kernel::Block { cuts, values } => {
                let b = cuts.len() - 1;
                let mut total = 0.0;
                for p in 0..b {
                    for q in 0..b {
                        total += values[p * b + q] * (cuts[p + 1] - cuts[p]) * (cuts[q + 1] - cuts[q]);
                    }
                }
                total
            }
            Kernel::Step(s) => s.total_mass(),
            Kernel::Poissonized { .. } => {
                self.bin_average_quad(1, MASS_QUAD_RESOLUTION).get(0, 0)
            }
            Kernel::Scaled { inner, factor } => factor * inner.mass_raw(),
        }
    }

    /// The L1 norm `int int k`. Errors on a zero-mass kernel because every
    /// downstream use divides by it.
    pub fn total_mass(&self) -> Result<f64> {
        let m = self.mass_raw();
        if m <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok(m)
    }

    /// The normalized kernel `k / ||k||_1`, with unit total mass. Built-in
    /// kinds normalize within their own family, keeping closed forms exact.
    pub fn normalize(&self) -> Result<Graphon> {
        let m = self.total_mass()?;
        let kind = match &self.kind {
            Kernel::Constant(c) => Kernel::Constant(c / m),
            // mass = (a + b/2)^2, so dividing the factor by a + b/2 does it
            Kernel::Product { a, b } => {
                let f = m.sqrt();
                Kernel::Product { a: a / f, b: b / f }
            }
            Kernel::Block { cuts, values } => Kernel::Block {
                cuts: cuts.clone(),
                values: values.iter().map(|v| v / m).collect(),
            },
            Kernel::Step(s) => Kernel::Step(s.scale(1.0 / m)?),
            Kernel::Poissonized { .. } | Kernel::Scaled { .. } => match &self.kind {
                Kernel::Scaled { inner, .. } => Kernel::Scaled {
                    inner: inner.clone(),
                    factor: 1.0 / inner.mass_raw(),
                },
                _ => Kernel::Scaled { inner: Box::new(self.clone()), factor: 1.0 / m },
            },
        };
        Ok(Graphon { kind })
    }

    /// The step graphon of cell averages on the equal `n`-partition:
    /// entry `(i,j) = n^2 * int_{A_i} int_{A_j} k`. Exact closed form for
    /// the built-in kinds; midpoint tensor quadrature with
    /// [`QUAD_POINTS_PER_BIN`] points per bin axis otherwise.
    pub fn bin_average(&self, n: usize) -> StepGraphon {
        assert!(n >= 1, "bin count must be at least 1");
        match &self.kind {
            Kernel::Constant(c) => StepGraphon::constant(n, *c).expect("constant cells"),
            Kernel::Product { a, b } => {
                let f: Vec<f64> =
                    (0..n).map(|i| a + b * (i as f64 + 0.5) / n as f64).collect();
                build_symmetric(n, |i, j| f[i] * f[j])
            }
            Kernel::Block { cuts, values } => block_bin_average(cuts, values, n),
            Kernel::Step(s) => {
                if s.n() == n {
                    return s.clone();
                }
                let cuts: Vec<f64> = (0..=s.n()).map(|k| k as f64 / s.n() as f64).collect();
                block_bin_average(&cuts, s.values(), n)
            }
            Kernel::Poissonized { .. } => self.bin_average_quad(n, QUAD_POINTS_PER_BIN),
            Kernel::Scaled { inner, factor } => {
                inner.bin_average(n).scale(*factor).expect("nonnegative factor")
            }
        }
    }

    /// Generic midpoint tensor quadrature version of [`Graphon::bin_average`],
    /// with `q` points per bin along each axis. Error is `O(q^-2)` for
    /// kernels smooth inside the cells.
    pub fn bin_average_quad(&self, n: usize, q: usize) -> StepGraphon {
        assert!(n >= 1 && q >= 1);
        let pts = n * q;
        build_symmetric(n, |i, j| {
            let mut sum = 0.0;
            for u in 0..q {
                let x = ((i * q + u) as f64 + 0.5) / pts as f64;
                for v in 0..q {
                    let y = ((j * q + v) as f64 + 0.5) / pts as f64;
                    sum += self.value_at(x, y);
                }
            }
            sum / (q * q) as f64
        })
    }

    /// Masses `int_{A_{m,j}} k(x, y) dy` of the horizontal slice at `x`,
    /// over the equal `m`-partition. Closed form for built-ins.
    pub(crate) fn slice_masses(&self, x: f64, m: usize) -> Vec<f64> {
        match &self.kind {
            Kernel::Constant(c) => vec![c / m as f64; m],
            Kernel::Product { a, b } => {
                let fx = a + b * x;
                (0..m)
                    .map(|j| fx * (a + b * (j as f64 + 0.5) / m as f64) / m as f64)
                    .collect()
            }
            Kernel::Block { cuts, values } => {
                let b = cuts.len() - 1;
                let p = block_of(cuts, x);
                (0..m)
                    .map(|j| {
                        let lo = j as f64 / m as f64;
                        let hi = (j + 1) as f64 / m as f64;
                        (0..b)
                            .map(|q| values[p * b + q] * overlap(lo, hi, cuts[q], cuts[q + 1]))
                            .sum()
                    })
                    .collect()
            }
            Kernel::Step(s) => {
                let cuts: Vec<f64> = (0..=s.n()).map(|k| k as f64 / s.n() as f64).collect();
                let b = s.n();
                let p = crate::graph::bin_index0(x, b);
                (0..m)
                    .map(|j| {
                        let lo = j as f64 / m as f64;
                        let hi = (j + 1) as f64 / m as f64;
                        (0..b)
                            .map(|q| s.get(p, q) * overlap(lo, hi, cuts[q], cuts[q + 1]))
                            .sum()
                    })
                    .collect()
            }
            Kernel::Poissonized { .. } | Kernel::Scaled { .. } => {
                let q = QUAD_POINTS_PER_BIN;
                let pts = m * q;
                (0..m)
                    .map(|j| {
                        (0..q)
                            .map(|v| self.value_at(x, ((j * q + v) as f64 + 0.5) / pts as f64))
                            .sum::<f64>()
                            / pts as f64
                    })
                    .collect()
            }
        }
    }

    /// The Poissonized kernel `rate^-1 (1 - e^{-rate k})`. Expects a
    /// normalized kernel (unit mass) and a positive rate. Stays within the
    /// value-mapped family where the kernel is piecewise constant.
    pub fn poissonize(&self, rate: f64) -> Result<Graphon> {
        if !(rate > 0.0) {
            return Err(Error::OutOfRange { what: "rate", value: rate });
        }
        let mass = self.mass_raw();
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidKernel(format!(
                "poissonize expects a normalized kernel, total mass is {mass}"
            )));
        }
        let kind = match &self.kind {
            Kernel::Constant(c) => Kernel::Constant(poissonize_value(*c, rate)),
            Kernel::Block { cuts, values } => Kernel::Block {
                cuts: cuts.clone(),
                values: values.iter().map(|&v| poissonize_value(v, rate)).collect(),
            },
            Kernel::Step(s) => Kernel::Step(s.map(|v| poissonize_value(v, rate))?),
            _ => Kernel::Poissonized { inner: Box::new(self.clone()), rate },
        };
        Ok(Graphon { kind })
    }

    /// Short stable label for trajectory records and error messages.
    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Graphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kernel::Constant(c) => write!(f, "constant(c={c})"),
            Kernel::Product { a, b } => write!(f, "product(a={a},b={b})"),
            Kernel::Block { cuts, .. } => {
                let cs: Vec<String> = cuts.iter().map(|c| format!("{c}")).collect();
                write!(f, "block(cuts=[{}])", cs.join(","))
            }
            Kernel::Step(s) => write!(f, "step(n={})", s.n()),
            Kernel::Poissonized { inner, rate } => write!(f, "poissonized(rate={rate},{inner})"),
            Kernel::Scaled { inner, factor } => write!(f, "scaled(factor={factor},{inner})"),
        }
    }
}

/// Index of the block containing `x` (half-open blocks, the last closed).
pub(crate) fn block_of(cuts: &[f64], x: f64) -> usize {
    let b = cuts.len() - 1;
    let idx = cuts.partition_point(|&c| c <= x);
    idx.saturating_sub(1).min(b - 1)
}

fn overlap(lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> f64 {
    (hi1.min(hi2) - lo1.max(lo2)).max(0.0)
}

/// Fill an `n x n` step graphon from the upper triangle of `entry`,
/// mirroring so the result is symmetric bitwise.
fn build_symmetric(n: usize, entry: impl Fn(usize, usize) -> f64) -> StepGraphon {
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = entry(i, j);
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    StepGraphon::new(n, values).expect("symmetric by construction")
}

/// Exact bin averages of a block kernel over the equal `n`-partition,
/// via interval overlaps: entry `(i,j) = n^2 * sum_pq V_pq |A_i ∩ B_p| |A_j ∩ B_q|`.
fn block_bin_average(cuts: &[f64], values: &[f64], n: usize) -> StepGraphon {
    let b = cuts.len() - 1;
    // overlap matrix W[i][p] = |A_i ∩ B_p|
    let mut w = vec![0.0; n * b];
    for i in 0..n {
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        for p in 0..b {
            w[i * b + p] = overlap(lo, hi, cuts[p], cuts[p + 1]);
        }
    }
    let n2 = (n * n) as f64;
    build_symmetric(n, |i, j| {
        let mut sum = 0.0;
        for p in 0..b {
            if w[i * b + p] == 0.0 {
                continue;
            }
            for q in 0..b {
                sum += values[p * b + q] * w[i * b + p] * w[j * b + q];
            }
        }
        n2 * sum
    })
}

/// Parse a kernel descriptor of the form used by the command line:
/// `kind=constant c=1.0`, `kind=product a=1.0 b=1.0`,
/// `kind=block cuts=0,0.5,1 values=2,1;1,3`, `kind=step file=<path>`
/// (the step file is a CSV matrix).
pub fn parse_kernel(descriptor: &str) -> Result<Graphon> {
    let mut kind = None;
    let mut fields = std::collections::BTreeMap::new();
    for token in descriptor.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::InvalidKernel(format!("expected key=value, got `{token}`")))?;
        if key == "kind" {
            kind = Some(value.to_string());
        } else {
            fields.insert(key.to_string(), value.to_string());
        }
    }
    let kind = kind.ok_or_else(|| Error::InvalidKernel("missing `kind=` field".into()))?;
    let num = |fields: &std::collections::BTreeMap<String, String>, key: &str| -> Result<f64> {
        fields
            .get(key)
            .ok_or_else(|| Error::InvalidKernel(format!("kind={kind} requires `{key}=`")))?
            .parse::<f64>()
            .map_err(|e| Error::InvalidKernel(format!("bad number for `{key}`: {e}")))
    };
    match kind.as_str() {
        "constant" => Graphon::constant(num(&fields, "c")?),
        "product" => Graphon::product(num(&fields, "a")?, num(&fields, "b")?),
        "block" => {
            let cuts: std::result::Result<Vec<f64>, _> = fields
                .get("cuts")
                .ok_or_else(|| Error::InvalidKernel("kind=block requires `cuts=`".into()))?
                .split(',')
                .map(|t| t.trim().parse::<f64>())
                .collect();
            let cuts = cuts.map_err(|e| Error::InvalidKernel(format!("bad cut: {e}")))?;
            let rows: std::result::Result<Vec<Vec<f64>>, Error> = fields
                .get("values")
                .ok_or_else(|| Error::InvalidKernel("kind=block requires `values=`".into()))?
                .split(';')
                .map(|row| {
                    row.split(',')
                        .map(|t| {
                            t.trim()
                                .parse::<f64>()
                                .map_err(|e| Error::InvalidKernel(format!("bad value: {e}")))
                        })
                        .collect()
                })
                .collect();
            Graphon::block(cuts, &rows?)
        }
        "step" => {
            let file = fields
                .get("file")
                .ok_or_else(|| Error::InvalidKernel("kind=step requires `file=`".into()))?;
            Ok(Graphon::step(StepGraphon::read_csv(Path::new(file))?))
        }
        other => Err(Error::InvalidKernel(format!("unknown kind `{other}`"))),
    }
}

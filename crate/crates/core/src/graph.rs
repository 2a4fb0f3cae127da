//! Clumping a chain trajectory into bins and building the sparse
//! indicator graph: consecutive samples landing in two distinct bins
//! connect the corresponding vertices.
//!
//! Edge weights follow the half convention `w_ij = I[any pair hit] / 2`,
//! under which the scaled graph `(n^2/N) G_n` and the averaged graph share
//! one normalization (each unordered edge occupies two ordered cells of
//! the associated step graphon).

use std::path::Path;

use crate::chain::ChainTrajectory;
use crate::error::{Error, Result};
use crate::step::StepGraphon;

/// Weight put on an edge whose bin pair was hit at least once.
pub const EDGE_WEIGHT: f64 = 0.5;

/// A weighted graph on `n` vertices: symmetric nonnegative weights with a
/// zero diagonal (no self-loops).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    /// Row-major `n * n`, symmetric, zero diagonal.
    weights: Vec<f64>,
}

impl WeightedGraph {
    pub fn zero(n: usize) -> Self {
        Self { n, weights: vec![0.0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Set the weight of the unordered edge `{i, j}`, `i != j`.
    pub(crate) fn set_weight(&mut self, i: usize, j: usize, w: f64) {
        debug_assert!(i != j, "no self-loops");
        self.weights[i * self.n + j] = w;
        self.weights[j * self.n + i] = w;
    }

    /// Number of unordered edges with positive weight.
    pub fn edge_count(&self) -> usize {
        let mut count = 0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.weight(i, j) > 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// The graph `c G` with every weight multiplied by `c >= 0`.
    pub fn scale(&self, c: f64) -> WeightedGraph {
        debug_assert!(c >= 0.0, "weights must stay nonnegative");
        WeightedGraph { n: self.n, weights: self.weights.iter().map(|w| c * w).collect() }
    }

    /// The associated step graphon: value `w_ij` on cell `I_i x I_j`.
    pub fn to_step_graphon(&self) -> StepGraphon {
        StepGraphon::new(self.n, self.weights.clone()).expect("weights form a step graphon")
    }

    /// Dump as a CSV edge list `i,j,weight` with `i < j` and 1-based labels.
    pub fn write_edge_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("i,j,weight\n");
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let w = self.weight(i, j);
                if w > 0.0 {
                    out.push_str(&format!("{},{},{}\n", i + 1, j + 1, w));
                }
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

/// Counts of consecutive-pair hits per unordered bin pair. Same-bin
/// transitions are tallied separately and never become edges.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCounts {
    n: usize,
    /// Row-major symmetric counts for `i != j`; zero on the diagonal.
    counts: Vec<u64>,
    diagonal: Vec<u64>,
}

impl PairCounts {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Hits of the unordered pair `{i, j}`, both directions pooled.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }

    /// Transitions with both endpoints in bin `i`.
    pub fn diagonal(&self, i: usize) -> u64 {
        self.diagonal[i]
    }

    /// Total over unordered off-diagonal pairs plus diagonal transitions;
    /// equals the number of trajectory steps.
    pub fn total(&self) -> u64 {
        let off: u64 = (0..self.n)
            .map(|i| ((i + 1)..self.n).map(|j| self.count(i, j)).sum::<u64>())
            .sum();
        off + self.diagonal.iter().sum::<u64>()
    }
}

/// Bin of `x` on the equal `n`-partition, 1-based as in the vertex labels;
/// the last bin also contains the right endpoint.
pub fn bin_index(x: f64, n: usize) -> Result<usize> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange { what: "x", value: x });
    }
    Ok(bin_index0(x, n) + 1)
}

/// 0-based variant of [`bin_index`] for valid inputs.
pub(crate) fn bin_index0(x: f64, n: usize) -> usize {
    ((x * n as f64) as usize).min(n - 1)
}

/// Tally every consecutive pair of the trajectory into bin pairs.
pub fn pair_counts(t: &ChainTrajectory, n: usize) -> PairCounts {
    let mut counts = vec![0u64; n * n];
    let mut diagonal = vec![0u64; n];
    for w in t.points().windows(2) {
        let i = bin_index0(w[0], n);
        let j = bin_index0(w[1], n);
        if i == j {
            diagonal[i] += 1;
        } else {
            counts[i * n + j] += 1;
            counts[j * n + i] += 1;
        }
    }
    PairCounts { n, counts, diagonal }
}

/// The indicator graph: `w_ij = 1/2` exactly when some consecutive pair of
/// the trajectory hits the unordered bin pair `{i, j}`.
pub fn build_rds_graph(t: &ChainTrajectory, n: usize) -> WeightedGraph {
    let counts = pair_counts(t, n);
    let mut g = WeightedGraph::zero(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if counts.count(i, j) > 0 {
                g.set_weight(i, j, EDGE_WEIGHT);
            }
        }
    }
    g
}

//! Step graphons: symmetric nonnegative matrices read as functions on
//! the unit square, constant on the cells of the equal `n`-partition.
//!
//! This is the common currency of the whole crate: clumped graphs, bin
//! averages of analytic kernels, and every metric computation all pass
//! through this type.

use std::path::Path;

use crate::error::{Error, Result};

/// A graphon that is constant on each cell `A_i x A_j` of the equal
/// partition of `[0,1]` into `n` bins. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    n: usize,
    /// Row-major `n * n` cell values.
    values: Vec<f64>,
}

impl StepGraphon {
    /// Build from a row-major value vector. The matrix must be square,
    /// symmetric, nonnegative and nonempty.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidKernel("bin count must be at least 1".into()));
        }
        if values.len() != n * n {
            return Err(Error::InvalidKernel(format!(
                "expected {} cell values, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidKernel(format!(
                        "cell ({i},{j}) has invalid value {v}"
                    )));
                }
                if (v - values[j * n + i]).abs() > 1e-12 {
                    return Err(Error::InvalidKernel(format!(
                        "matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { n, values })
    }

    /// Build from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidKernel("matrix is not square".into()));
        }
        Self::new(n, rows.iter().flatten().copied().collect())
    }

    /// A step graphon that is zero everywhere.
    pub fn zero(n: usize) -> Self {
        Self { n, values: vec![0.0; n * n] }
    }

    /// A step graphon that is `v` everywhere.
    pub fn constant(n: usize, v: f64) -> Result<Self> {
        Self::new(n, vec![v; n * n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at a point of the unit square.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let i = crate::graph::bin_index0(x, self.n);
        let j = crate::graph::bin_index0(y, self.n);
        self.get(i, j)
    }

    /// `(1/n^2) * sum |a_ij - b_ij|`, the L1 distance of the associated
    /// graphons. Both operands must live on the same partition.
    pub fn l1_distance(&self, other: &StepGraphon) -> Result<f64> {
        if self.n != other.n {
            return Err(Error::BinMismatch { left: self.n, right: other.n });
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(sum / (self.n * self.n) as f64)
    }

    /// Total mass of the associated graphon, `(1/n^2) * sum of cells`.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / (self.n * self.n) as f64
    }

    /// Refine each bin into `k` equal bins; the function on the square is
    /// unchanged, only the partition is finer.
    pub fn refine(&self, k: usize) -> StepGraphon {
        assert!(k >= 1, "refinement factor must be at least 1");
        let m = self.n * k;
        let mut values = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                values[i * m + j] = self.get(i / k, j / k);
            }
        }
        StepGraphon { n: m, values }
    }

    /// Apply `f` cellwise. The result must remain a valid step graphon.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<StepGraphon> {
        StepGraphon::new(self.n, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Entrywise multiple `c * self` for nonnegative `c`.
    pub fn scale(&self, c: f64) -> Result<StepGraphon> {
        self.map(|v| c * v)
    }

    /// Read an `n x n` matrix from CSV (no header, one row per line).
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_path(path)?;
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record?;
            let row: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::InvalidKernel(format!("bad matrix entry: {e}")))?);
        }
        Self::from_rows(&rows)
    }

    /// Write the matrix as CSV (no header, one row per line).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> =
                (0..self.n).map(|j| format!("{}", self.get(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetry_and_negatives() {
        assert!(StepGraphon::from_rows(&[vec![1.0, 2.0], vec![3.0, 1.0]]).is_err());
        assert!(StepGraphon::from_rows(&[vec![1.0, -2.0], vec![-2.0, 1.0]]).is_err());
        assert!(StepGraphon::new(0, vec![]).is_err());
    }

    #[test]
    fn l1_distance_hand_values() {
        let ones = StepGraphon::constant(2, 1.0).unwrap();
        let anti = StepGraphon::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(ones.l1_distance(&ones).unwrap(), 0.0);
        assert!((ones.l1_distance(&anti).unwrap() - 0.5).abs() < 1e-15);

        let a = StepGraphon::constant(1, 2.0).unwrap();
        let b = StepGraphon::constant(1, 0.5).unwrap();
        assert!((a.l1_distance(&b).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn l1_distance_requires_matching_partitions() {
        let a = StepGraphon::constant(2, 1.0).unwrap();
        let b = StepGraphon::constant(3, 1.0).unwrap();
        assert!(matches!(
            a.l1_distance(&b),
            Err(Error::BinMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn refine_preserves_the_function() {
        let s = StepGraphon::from_rows(&[vec![0.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let r = s.refine(3);
        assert_eq!(r.n(), 6);
        for &(x, y) in &[(0.1, 0.9), (0.49, 0.51), (0.75, 0.75), (0.0, 1.0)] {
            assert_eq!(s.eval(x, y), r.eval(x, y));
        }
        assert!((s.total_mass() - r.total_mass()).abs() < 1e-15);
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("step.csv");
        let s = StepGraphon::from_rows(&[vec![0.25, 1.5], vec![1.5, 3.0]]).unwrap();
        s.write_csv(&path).unwrap();
        let back = StepGraphon::read_csv(&path).unwrap();
        assert_eq!(s, back);
    }
}

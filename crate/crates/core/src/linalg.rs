//! Dense vector helpers and the operator values `L₂(ℝ^M, ℝ^N)` used for noise
//! coefficients. Vectors are plain `[f64]` slices; every reduction runs left to
//! right so results are reproducible bit for bit.

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], c: f64) -> Vec<f64> {
    a.iter().map(|x| c * x).collect()
}

/// `y += c * x`
pub fn axpy(y: &mut [f64], c: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

/// A linear map `ℝ^cols → ℝ^rows` stored row-major. Norms are Hilbert–Schmidt.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorValue {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl OperatorValue {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::arg(format!(
                "operator data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::arg("operator entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `self · x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// Adds `self · x` into `out`.
    pub fn apply_add(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o += dot(self.row(r), x);
        }
    }

    pub fn hilbert_schmidt(&self) -> f64 {
        norm(&self.data)
    }

    /// Hilbert–Schmidt inner product `tr(selfᵀ other)`.
    pub fn hs_inner(&self, other: &OperatorValue) -> f64 {
        dot(&self.data, &other.data)
    }

    /// Multiplies row `r` by `factors[r]`, i.e. left multiplication by a diagonal map.
    pub fn scale_rows(&mut self, factors: &[f64]) {
        for (r, f) in factors.iter().enumerate() {
            for v in &mut self.data[r * self.cols..(r + 1) * self.cols] {
                *v *= f;
            }
        }
    }

    pub fn sub(&self, other: &OperatorValue) -> OperatorValue {
        OperatorValue {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &other.data),
        }
    }

    pub fn scaled(&self, c: f64) -> OperatorValue {
        OperatorValue {
            rows: self.rows,
            cols: self.cols,
            data: scale(&self.data, c),
        }
    }

    /// Operator norm estimate by power iteration on `selfᵀ self`; bounded above by
    /// the Hilbert–Schmidt norm.
    pub fn operator_norm(&self) -> f64 {
        if self.cols == 0 || self.rows == 0 {
            return 0.0;
        }
        let mut v = vec![1.0 / (self.cols as f64).sqrt(); self.cols];
        let mut sigma = 0.0;
        for _ in 0..200 {
            let av = self.apply(&v);
            let mut atav = vec![0.0; self.cols];
            for (r, a) in av.iter().enumerate() {
                axpy(&mut atav, *a, self.row(r));
            }
            let nrm = norm(&atav);
            if nrm == 0.0 {
                return 0.0;
            }
            let next = nrm.sqrt();
            v = scale(&atav, 1.0 / nrm);
            if (next - sigma).abs() <= 1e-13 * next {
                sigma = next;
                break;
            }
            sigma = next;
        }
        sigma.min(self.hilbert_schmidt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn operator_norm_of_diagonal() {
        let op = OperatorValue::from_row_major(2, 2, vec![3.0, 0.0, 0.0, -4.0]).unwrap();
        assert!((op.operator_norm() - 4.0).abs() < 1e-10);
        assert!((op.hilbert_schmidt() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn shape_checked() {
        assert!(OperatorValue::from_row_major(2, 3, vec![0.0; 5]).is_err());
    }
}

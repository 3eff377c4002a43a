use std::sync::Arc;

use super::{DenseMatrix, Signal};
use crate::error::{Error, Result};

/// Linear operator stored as `sum_k c_k L_k R_k^T`.
///
/// Reconstruction operators on fine grids have rank equal to the number of
/// samples, far below the grid size, so they are kept in this form and only
/// densified on request.
#[derive(Debug, Clone)]
pub struct FactoredOperator {
    rows: usize,
    cols: usize,
    terms: Vec<(f64, Arc<DenseMatrix>, Arc<DenseMatrix>)>,
}

impl FactoredOperator {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            terms: Vec::new(),
        }
    }

    /// `left * right^T`.
    pub fn outer(left: DenseMatrix, right: DenseMatrix) -> Result<Self> {
        Self::zero(left.nrows(), right.nrows()).with_term(1.0, left, right)
    }

    /// Adds `coef * left * right^T`.
    pub fn with_term(mut self, coef: f64, left: DenseMatrix, right: DenseMatrix) -> Result<Self> {
        if left.nrows() != self.rows {
            return Err(Error::GridMismatch {
                expected: self.rows,
                got: left.nrows(),
            });
        }
        if right.nrows() != self.cols {
            return Err(Error::GridMismatch {
                expected: self.cols,
                got: right.nrows(),
            });
        }
        if left.ncols() != right.ncols() {
            return Err(Error::LengthMismatch {
                expected: left.ncols(),
                got: right.ncols(),
            });
        }
        self.terms.push((coef, Arc::new(left), Arc::new(right)));
        Ok(self)
    }

    /// `a * self + b * other`. Factors are shared, not copied, and no
    /// arithmetic mixes the two, so `a = 1, b = 0` reproduces `self` exactly.
    pub fn combine(&self, a: f64, other: &FactoredOperator, b: f64) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::GridMismatch {
                expected: self.rows,
                got: other.rows,
            });
        }
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        for (c, l, r) in &self.terms {
            terms.push((a * c, l.clone(), r.clone()));
        }
        for (c, l, r) in &other.terms {
            terms.push((b * c, l.clone(), r.clone()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            terms,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `(coef, left, right)` triples.
    pub fn terms(&self) -> impl Iterator<Item = (f64, &DenseMatrix, &DenseMatrix)> {
        self.terms.iter().map(|(c, l, r)| (*c, l.as_ref(), r.as_ref()))
    }

    pub fn apply(&self, x: &Signal) -> Result<Signal> {
        if x.len() != self.cols {
            return Err(Error::GridMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        let mut y = Signal::zeros(self.rows);
        for (c, l, r) in &self.terms {
            if *c != 0.0 {
                y.gemv(*c, l.as_ref(), &r.tr_mul(x), 1.0);
            }
        }
        Ok(y)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for (c, l, r) in &self.terms {
            if *c != 0.0 {
                m.gemm(*c, l.as_ref(), &r.transpose(), 1.0);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn apply_matches_dense() {
        let l = dmatrix![1.0, 2.0; 0.0, 1.0; 3.0, 0.0];
        let r = dmatrix![1.0, 0.0; 0.5, 1.0];
        let op = FactoredOperator::outer(l.clone(), r.clone())
            .unwrap()
            .with_term(-2.0, dmatrix![1.0; 1.0; 1.0], dmatrix![0.0; 1.0])
            .unwrap();
        let dense: DenseMatrix = &l * r.transpose() - dmatrix![0.0, 1.0; 0.0, 1.0; 0.0, 1.0] * 2.0;
        assert!((op.to_dense() - &dense).norm() < 1e-15);
        let x = dvector![0.3, -1.2];
        assert!((op.apply(&x).unwrap() - dense * x).norm() < 1e-15);
    }

    #[test]
    fn combine_endpoints_are_exact() {
        let a = FactoredOperator::outer(dmatrix![0.1; 0.7], dmatrix![0.3; 0.9]).unwrap();
        let b = FactoredOperator::outer(dmatrix![1.1; -0.2], dmatrix![0.4; 0.6]).unwrap();
        assert_eq!(a.combine(1.0, &b, 0.0).unwrap().to_dense(), a.to_dense());
        assert_eq!(a.combine(0.0, &b, 1.0).unwrap().to_dense(), b.to_dense());
    }

    #[test]
    fn shape_checks() {
        assert!(FactoredOperator::zero(3, 2)
            .with_term(1.0, DenseMatrix::zeros(2, 1), DenseMatrix::zeros(2, 1))
            .is_err());
        assert!(FactoredOperator::zero(3, 2)
            .apply(&dvector![1.0, 2.0, 3.0])
            .is_err());
    }
}

//! Design matrices and Gram-matrix algebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Relative eigenvalue floor below which `XᵀX` counts as singular.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A full-column-rank `N × m` predictor matrix with its Gram factorization.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    x: DMatrix<f64>,
    labels: Vec<String>,
    gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    gram_logdet: f64,
    column_norms: Vec<f64>,
}

impl DesignMatrix {
    pub fn from_matrix(x: DMatrix<f64>) -> Result<Self> {
        let labels = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_labels(x, labels)
    }

    /// Builds from column vectors; every column must have `n_rows` entries.
    pub fn from_columns(n_rows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        for col in columns {
            if col.len() != n_rows {
                return Err(Error::DimensionMismatch {
                    what: "design column length",
                    expected: n_rows,
                    found: col.len(),
                });
            }
        }
        let x = DMatrix::from_fn(n_rows, columns.len(), |i, j| columns[j][i]);
        Self::from_matrix(x)
    }

    pub fn with_labels(x: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != x.ncols() {
            return Err(Error::DimensionMismatch {
                what: "design column labels",
                expected: x.ncols(),
                found: labels.len(),
            });
        }
        if x.nrows() == 0 {
            return Err(Error::InvalidParameter("design matrix has no rows".into()));
        }
        if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
            let (i, j) = (pos % x.nrows(), pos / x.nrows());
            return Err(Error::NonFinite(format!(
                "design matrix entry ({}, {})",
                i + 1,
                j + 1
            )));
        }
        let gram = x.tr_mul(&x);
        if gram.ncols() > 0 {
            let eig = SymmetricEigen::new(gram.clone());
            let max = eig.eigenvalues.max();
            let min = eig.eigenvalues.min();
            if !(max > 0.0) || min < RANK_TOLERANCE * max {
                return Err(Error::RankDeficient {
                    min_eigenvalue: min,
                    max_eigenvalue: max,
                });
            }
        }
        let chol = Cholesky::new(gram.clone()).ok_or(Error::RankDeficient {
            min_eigenvalue: 0.0,
            max_eigenvalue: 0.0,
        })?;
        let gram_logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let column_norms = x.column_iter().map(|c| c.norm()).collect();
        Ok(Self {
            x,
            labels,
            gram,
            chol,
            gram_logdet,
            column_norms,
        })
    }

    /// `N`.
    pub fn nrows(&self) -> usize {
        self.x.nrows()
    }

    /// `m`.
    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    /// Always equal to `ncols()`; construction rejects deficient matrices.
    pub fn rank(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `ln |XᵀX|` from the Cholesky factor.
    pub fn gram_logdet(&self) -> f64 {
        self.gram_logdet
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    /// Solves `XᵀX b = rhs`.
    pub fn solve_gram(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(rhs)
    }

    pub fn gram_inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }

    /// `dᵀ XᵀX d`, evaluated as `‖X d‖²` so it is never negative.
    pub fn gram_quadratic(&self, d: &DVector<f64>) -> f64 {
        (&self.x * d).norm_squared()
    }

    /// Returns a copy with columns reordered: new column `j` is old column `order[j]`.
    pub fn permute_columns(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.ncols() {
            return Err(Error::DimensionMismatch {
                what: "column permutation",
                expected: self.ncols(),
                found: order.len(),
            });
        }
        let x = DMatrix::from_fn(self.nrows(), order.len(), |i, j| self.x[(i, order[j])]);
        let labels = order.iter().map(|&j| self.labels[j].clone()).collect();
        Self::with_labels(x, labels)
    }
}

pub fn build_design_matrix(data: &Dataset, spec: &ModelSpec) -> Result<DesignMatrix> {
    spec.validate(data)?;
    let mut columns = Vec::with_capacity(spec.width());
    let mut labels = Vec::with_capacity(spec.width());
    for term in &spec.terms {
        term.expand(data, &mut columns, &mut labels)?;
    }
    let n = data.n_rows();
    let x = DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i]);
    DesignMatrix::with_labels(x, labels)
}

pub fn gram_logdet(x: &DesignMatrix) -> f64 {
    x.gram_logdet()
}

/// Orthogonalizes the columns of `X` in order (modified Gram-Schmidt with one
/// re-orthogonalization pass). Returned vectors are not normalized: `x̃_j` is
/// the part of `x_j` orthogonal to `x_1 … x_{j-1}`.
pub fn gram_schmidt(x: &DesignMatrix) -> Vec<DVector<f64>> {
    let mut units: Vec<DVector<f64>> = Vec::with_capacity(x.ncols());
    let mut out = Vec::with_capacity(x.ncols());
    for col in x.matrix().column_iter() {
        let mut v: DVector<f64> = col.into_owned();
        for _ in 0..2 {
            for u in &units {
                let proj = u.dot(&v);
                v.axpy(-proj, u, 1.0);
            }
        }
        let norm = v.norm();
        units.push(&v / norm);
        out.push(v);
    }
    out
}

/// `ln |XᵀX|` recomputed as `2 Σ ln ‖x̃_j‖`.
pub fn gram_schmidt_logdet(x: &DesignMatrix) -> f64 {
    2.0 * gram_schmidt(x).iter().map(|v| v.norm().ln()).sum::<f64>()
}

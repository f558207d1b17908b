//! Dense symmetric-matrix kernel: Cholesky factorization, inversion,
//! log-determinant, and a cyclic Jacobi eigensolver.
//!
//! Everything downstream (model construction, IPF, CAM spectra) runs on the
//! two types defined here. Storage is dense row-major; matrices are desk
//! scale (n up to a few hundred), so correctness and determinism win over
//! sparsity tricks. All types are immutable after construction and safe to
//! share across threads.

use std::fmt;

/// Absolute floor for Cholesky pivots. A pivot at or below this value means
/// the matrix is treated as not positive definite.
pub const PD_TOLERANCE: f64 = 1e-12;

/// Jacobi convergence threshold factor: the sweep loop stops once the
/// off-diagonal Frobenius norm drops below `EIG_TOL_FACTOR * ||A||_F`.
pub const EIG_TOL_FACTOR: f64 = 1e-12;

/// Maximum number of cyclic Jacobi sweeps before giving up.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Errors from the linear-algebra kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum SymmatError {
    /// A Cholesky pivot fell at or below [`PD_TOLERANCE`].
    NotPositiveDefinite { pivot_index: usize, pivot: f64 },
    /// The Jacobi sweep loop did not reduce the off-diagonal norm in time.
    ConvergenceFailure { sweeps: usize, off_norm: f64 },
    /// Two operands have incompatible dimensions.
    DimensionMismatch { expected: usize, got: usize },
    /// Input entries are not exactly symmetric.
    NotSymmetric { row: usize, col: usize },
}

impl fmt::Display for SymmatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmatError::NotPositiveDefinite { pivot_index, pivot } => write!(
                f,
                "matrix is not positive definite: pivot {pivot_index} is {pivot:e} (tolerance {PD_TOLERANCE:e})"
            ),
            SymmatError::ConvergenceFailure { sweeps, off_norm } => write!(
                f,
                "Jacobi eigensolver failed to converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})"
            ),
            SymmatError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            SymmatError::NotSymmetric { row, col } => {
                write!(f, "matrix is not symmetric at ({row}, {col})")
            }
        }
    }
}

impl std::error::Error for SymmatError {}

/// Minimal general dense matrix, row-major. Used for eigenvector tables and
/// intermediate products; the symmetric type below is the public currency.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Plain O(n^3) product; operand shapes must agree.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += aik * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }
}

/// Dense symmetric matrix with exact (bitwise) symmetry by construction.
///
/// The name reflects its role here: every instance in this crate is a
/// covariance or precision matrix, positive definite whenever the operations
/// below are applicable.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = values[i];
        }
        Self { n, data }
    }

    /// Builds from a generator evaluated only on the lower triangle
    /// (`i >= j`); the upper triangle is mirrored, so symmetry is exact.
    pub fn from_fn_sym(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    /// Validates exact symmetry of explicit row data.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SymmatError> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(SymmatError::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &value) in row.iter().enumerate().take(i) {
                if value != rows[j][i] {
                    return Err(SymmatError::NotSymmetric { row: i, col: j });
                }
            }
        }
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    /// Symmetrizes a square general matrix by averaging mirror entries.
    /// Used where a product is symmetric in exact arithmetic but carries
    /// round-off asymmetry.
    pub fn symmetrized(m: &Matrix) -> Self {
        assert_eq!(m.rows(), m.cols(), "symmetrized: matrix must be square");
        Self::from_fn_sym(m.rows(), |i, j| {
            if i == j {
                m.get(i, i)
            } else {
                0.5 * (m.get(i, j) + m.get(j, i))
            }
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copy into the general matrix type for products.
    pub fn to_matrix(&self) -> Matrix {
        Matrix { rows: self.n, cols: self.n, data: self.data.clone() }
    }

    /// Max-absolute-entry norm.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()))
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|&v| v * v).sum::<f64>().sqrt()
    }

    /// Largest entrywise absolute difference against another matrix.
    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        assert_eq!(self.n, other.n, "max_abs_diff: dimension mismatch");
        self.data.iter().zip(&other.data).fold(0.0_f64, |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    /// Lower-triangular Cholesky factor `L` with `L Lᵀ = A`.
    ///
    /// Serves as the PD test and as the square-root surrogate for sampling.
    /// Fails with `NotPositiveDefinite` when a pivot reaches the absolute
    /// floor [`PD_TOLERANCE`].
    pub fn cholesky(&self) -> Result<CholeskyFactor, SymmatError> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = self.data[i * n + j];
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= PD_TOLERANCE {
                        return Err(SymmatError::NotPositiveDefinite {
                            pivot_index: i,
                            pivot: sum,
                        });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        Ok(CholeskyFactor { n, data: l })
    }

    /// `log|A|` via the Cholesky factor: `2 Σ log L_ii`.
    pub fn log_det(&self) -> Result<f64, SymmatError> {
        Ok(self.cholesky()?.log_det())
    }

    /// Inverse via the Cholesky factor; exactly symmetric by construction.
    pub fn inverse(&self) -> Result<CovarianceMatrix, SymmatError> {
        Ok(self.cholesky()?.inverse())
    }

    /// Eigendecomposition by cyclic Jacobi rotations.
    ///
    /// Deterministic for a fixed input: pivots are visited in row order and
    /// the spectrum is returned ascending with a stable tie order.
    pub fn eig_sym(&self) -> Result<EigenDecomposition, SymmatError> {
        let n = self.n;
        if n == 1 {
            return Ok(EigenDecomposition {
                eigenvalues: vec![self.data[0]],
                eigenvectors: Matrix::identity(1),
            });
        }
        let mut a = self.data.clone();
        let mut v = Matrix::identity(n);
        let tol = EIG_TOL_FACTOR * self.norm_frobenius();

        let off_norm = |a: &[f64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let x = a[i * n + j];
                    s += 2.0 * x * x;
                }
            }
            s.sqrt()
        };

        let mut off = off_norm(&a);
        let mut sweeps = 0;
        while off > tol {
            if sweeps == MAX_JACOBI_SWEEPS {
                return Err(SymmatError::ConvergenceFailure { sweeps, off_norm: off });
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    // Rotation angle from the standard stable formulas.
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (theta * theta + 1.0).sqrt())
                    } else {
                        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;

                    a[p * n + p] -= t * apq;
                    a[q * n + q] += t * apq;
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    for k in 0..n {
                        if k == p || k == q {
                            continue;
                        }
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[p * n + k] = a[k * n + p];
                        a[k * n + q] = s * akp + c * akq;
                        a[q * n + k] = a[k * n + q];
                    }
                    for k in 0..n {
                        let vkp = v.get(k, p);
                        let vkq = v.get(k, q);
                        v.set(k, p, c * vkp - s * vkq);
                        v.set(k, q, s * vkp + c * vkq);
                    }
                }
            }
            sweeps += 1;
            off = off_norm(&a);
        }

        // Sort ascending; stable in the original index for determinism.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[i * n + i]
                .partial_cmp(&a[j * n + j])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(i.cmp(&j))
        });
        let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
        let eigenvectors = Matrix::from_fn(n, n, |i, j| v.get(i, order[j]));
        Ok(EigenDecomposition { eigenvalues, eigenvectors })
    }
}

/// Lower-triangular Cholesky factor of a positive-definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    data: Vec<f64>, // lower triangle, row-major; strict upper part is zero
}

impl CholeskyFactor {
    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// `log|A| = 2 Σ log L_ii`.
    pub fn log_det(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].ln()).sum::<f64>() * 2.0
    }

    /// Reconstructs `L Lᵀ`.
    pub fn reconstruct(&self) -> CovarianceMatrix {
        let n = self.n;
        CovarianceMatrix::from_fn_sym(n, |i, j| {
            let mut s = 0.0;
            for k in 0..=j.min(i) {
                s += self.data[i * n + k] * self.data[j * n + k];
            }
            s
        })
    }

    /// `A⁻¹ = L⁻ᵀ L⁻¹`, assembled symmetrically.
    pub fn inverse(&self) -> CovarianceMatrix {
        let n = self.n;
        // Forward-substitute columns of the identity to get L⁻¹ (lower).
        let mut linv = vec![0.0; n * n];
        for col in 0..n {
            linv[col * n + col] = 1.0 / self.data[col * n + col];
            for i in (col + 1)..n {
                let mut s = 0.0;
                for k in col..i {
                    s -= self.data[i * n + k] * linv[k * n + col];
                }
                linv[i * n + col] = s / self.data[i * n + i];
            }
        }
        CovarianceMatrix::from_fn_sym(n, |i, j| {
            // (L⁻ᵀ L⁻¹)[i][j] = Σ_k L⁻¹[k][i] · L⁻¹[k][j]; terms vanish for k < max(i, j).
            let mut s = 0.0;
            for k in i.max(j)..n {
                s += linv[k * n + i] * linv[k * n + j];
            }
            s
        })
    }
}

/// Spectrum of a symmetric matrix: eigenvalues ascending, eigenvector
/// column `i` paired with eigenvalue `i`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl EigenDecomposition {
    /// Assembles `V f(Λ) Vᵀ` for an entrywise spectral map `f`, symmetric
    /// by construction.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> CovarianceMatrix {
        let n = self.eigenvalues.len();
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        CovarianceMatrix::from_fn_sym(n, |i, j| {
            let mut s = 0.0;
            for (k, &mk) in mapped.iter().enumerate() {
                s += self.eigenvectors.get(i, k) * mk * self.eigenvectors.get(j, k);
            }
            s
        })
    }
}

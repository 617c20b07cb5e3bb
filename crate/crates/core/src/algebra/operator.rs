//! Dense 2^n × 2^n operators, tensor products and the Hermitian eigensolver facade.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::pauli::{identity2, Mat2};
use super::state::StateVector;
use crate::error::{MerminError, Result};

/// Dense operators are limited to this many qubits (a 4096 × 4096 complex
/// matrix is 268 MB). Larger systems go through the matrix-free kernels.
pub const DENSE_CAP: usize = 12;

/// Relative tolerance for accepting an operator as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: DMatrix<Complex64>,
}

pub(crate) fn check_dense_cap(what: &'static str, n: usize) -> Result<()> {
    if n > DENSE_CAP {
        return Err(MerminError::CapExceeded {
            what,
            n,
            cap: DENSE_CAP,
        });
    }
    Ok(())
}

impl DenseOperator {
    pub fn from_matrix(n: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        check_dense_cap("dense operator", n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(MerminError::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { n, matrix })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_dense_cap("dense operator", n)?;
        Ok(Self {
            n,
            matrix: DMatrix::zeros(1 << n, 1 << n),
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_dense_cap("dense operator", n)?;
        Ok(Self {
            n,
            matrix: DMatrix::identity(1 << n, 1 << n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise `|M - M†|`, relative to the largest entry (absolute
    /// for the zero operator).
    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut dev = 0.0f64;
        for r in 0..dim {
            for c in r..dim {
                dev = dev.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        let scale = self.max_abs_entry();
        if scale > 0.0 {
            dev / scale
        } else {
            dev
        }
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        self.same_shape(other)?;
        Ok((&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    pub fn compose(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_shape(other)?;
        Ok(DenseOperator {
            n: self.n,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.same_shape(other)?;
        Ok(DenseOperator {
            n: self.n,
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn scale(&self, factor: Complex64) -> DenseOperator {
        DenseOperator {
            n: self.n,
            matrix: &self.matrix * factor,
        }
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator {
            n: self.n,
            matrix: self.matrix.adjoint(),
        }
    }

    pub(crate) fn add_assign_scaled(&mut self, other: &DenseOperator, factor: f64) {
        self.matrix.zip_apply(&other.matrix, |a, b| *a += b * factor);
    }

    pub fn apply(&self, state: &StateVector) -> Result<Vec<Complex64>> {
        if state.n() != self.n {
            return Err(MerminError::DimensionMismatch {
                expected: self.n,
                found: state.n(),
            });
        }
        let v = DVector::from_column_slice(state.amplitudes());
        Ok((&self.matrix * v).iter().copied().collect())
    }

    /// `⟨φ|M|φ⟩`.
    pub fn expectation(&self, state: &StateVector) -> Result<Complex64> {
        let mv = self.apply(state)?;
        Ok(super::state::inner(state.amplitudes(), &mv))
    }

    fn same_shape(&self, other: &DenseOperator) -> Result<()> {
        if self.n != other.n {
            return Err(MerminError::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }
}

fn kron_mat2(left: &DMatrix<Complex64>, right: &Mat2) -> DMatrix<Complex64> {
    let d = left.nrows();
    DMatrix::from_fn(2 * d, 2 * d, |r, c| {
        left[(r / 2, c / 2)] * right[(r % 2, c % 2)]
    })
}

/// Kronecker product `ops[0] ⊗ ops[1] ⊗ ... ⊗ ops[n-1]`; qubit 1 is the
/// leftmost factor.
pub fn tensor_chain(ops: &[Mat2], n: usize) -> Result<DenseOperator> {
    if ops.len() != n {
        return Err(MerminError::DimensionMismatch {
            expected: n,
            found: ops.len(),
        });
    }
    if n == 0 {
        return Err(MerminError::Invalid("tensor chain needs at least one factor".into()));
    }
    check_dense_cap("tensor chain", n)?;
    let mut acc = DMatrix::from_fn(2, 2, |r, c| ops[0][(r, c)]);
    for op in &ops[1..] {
        acc = kron_mat2(&acc, op);
    }
    Ok(DenseOperator { n, matrix: acc })
}

/// `I ⊗ ... ⊗ op ⊗ ... ⊗ I` with `op` on qubit `j` (1-based).
pub fn embed_local(op: &Mat2, j: usize, n: usize) -> Result<DenseOperator> {
    if j == 0 || j > n {
        return Err(MerminError::QubitOutOfRange { index: j, n });
    }
    let mut ops = vec![identity2(); n];
    ops[j - 1] = *op;
    tensor_chain(&ops, n)
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

fn hermitian_part(op: &DenseOperator) -> Result<DMatrix<Complex64>> {
    let deviation = op.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(MerminError::NotHermitian { deviation });
    }
    let m = &op.matrix;
    Ok((m + m.adjoint()) * Complex64::new(0.5, 0.0))
}

pub fn hermitian_eigensystem(op: &DenseOperator) -> Result<Eigensystem> {
    let sym = hermitian_part(op)?;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut values = Vec::with_capacity(order.len());
    let mut vectors = Vec::with_capacity(order.len());
    for k in order {
        values.push(eig.eigenvalues[k]);
        let col: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
        vectors.push(StateVector::normalized(op.n, col)?);
    }
    Ok(Eigensystem { values, vectors })
}

/// Eigenvalues only, descending.
pub fn hermitian_eigenvalues(op: &DenseOperator) -> Result<Vec<f64>> {
    let sym = hermitian_part(op)?;
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Spectral norm `max_k |λ_k|` of a Hermitian operator.
pub fn operator_norm(op: &DenseOperator) -> Result<f64> {
    Ok(hermitian_eigenvalues(op)?
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max))
}

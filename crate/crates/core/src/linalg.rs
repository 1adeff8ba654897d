//! Sparse direct solvers (faer) with iterative refinement.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, LdltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::perm::PermRef;
use faer::{Conj, MatMut, Par, Side};

use crate::error::{Error, Result};
use crate::ordering::metis_nested_dissection;
use crate::sparse::CsrMatrix;

/// Lower triangle of a symmetric CSR matrix as a faer column matrix.
fn lower_csc(a: &CsrMatrix) -> SparseColMat<usize, f64> {
    let n = a.nrows();
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    for r in 0..n {
        for (c, v) in a.row(r) {
            if c >= r {
                row_idx.push(c);
                values.push(v);
            }
        }
        col_ptr.push(row_idx.len());
    }
    SparseColMat::new(SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx), values)
}

fn full_csc(a: &CsrMatrix) -> SparseColMat<usize, f64> {
    let t = a.transpose();
    SparseColMat::new(
        SymbolicSparseColMat::new_checked(a.nrows(), a.ncols(), t.indptr().to_vec(), None, t.indices().to_vec()),
        t.values().to_vec(),
    )
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Row-sum norm of `a`.
fn matrix_inf_norm(a: &CsrMatrix) -> f64 {
    (0..a.nrows()).map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Normwise backward error `‖b - Ax‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞)`.
pub fn backward_error(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let r = residual(a, x, b);
    let denom = matrix_inf_norm(a) * inf_norm(x) + inf_norm(b);
    if denom == 0.0 {
        0.0
    } else {
        inf_norm(&r) / denom
    }
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    b.iter().zip(ax).map(|(bi, axi)| bi - axi).collect()
}

enum Factor {
    Llt(Llt<usize, f64>),
    Ldlt { symbolic: SymbolicCholesky<usize>, values: Vec<f64> },
    Lu(Lu<usize, f64>),
}

impl Factor {
    fn solve_in_place(&self, x: &mut [f64]) {
        let n = x.len();
        let rhs = MatMut::from_column_major_slice_mut(x, n, 1);
        match self {
            Factor::Llt(f) => f.solve_in_place_with_conj(Conj::No, rhs),
            Factor::Lu(f) => f.solve_in_place_with_conj(Conj::No, rhs),
            Factor::Ldlt { symbolic, values } => {
                let mut mem = MemBuffer::new(symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
                LdltRef::new(symbolic, values).solve_in_place_with_conj(
                    Conj::No,
                    rhs,
                    Par::Seq,
                    MemStack::new(&mut mem),
                );
            }
        }
    }
}

fn analyse(lower: &SparseColMat<usize, f64>, ordering: SymmetricOrdering<'_, usize>) -> Result<SymbolicCholesky<usize>> {
    factorize_symbolic_cholesky(lower.symbolic(), Side::Lower, ordering, CholeskySymbolicParams::default())
        .map_err(|e| Error::FactorizationFailure(format!("symbolic: {e:?}")))
}

fn analyse_order(lower: &SparseColMat<usize, f64>, fwd: &[usize]) -> Result<SymbolicCholesky<usize>> {
    let mut inv = vec![0; fwd.len()];
    for (i, &p) in fwd.iter().enumerate() {
        inv[p] = i;
    }
    analyse(lower, SymmetricOrdering::Custom(PermRef::new_checked(fwd, &inv, fwd.len())))
}

/// AMD or METIS nested dissection, whichever gives the smaller factor.
fn symbolic_factor(a: &CsrMatrix, lower: &SparseColMat<usize, f64>) -> Result<SymbolicCholesky<usize>> {
    let amd = analyse(lower, SymmetricOrdering::Amd)?;
    let Some(fwd) = metis_nested_dissection(a) else { return Ok(amd) };
    let nd = analyse_order(lower, &fwd)?;
    log::debug!("factor entries: amd {}, nested dissection {}", amd.len_val(), nd.len_val());
    Ok(if nd.len_val() < amd.len_val() { nd } else { amd })
}

/// Backward error targeted by iterative refinement.
pub const REFINEMENT_TOL: f64 = 1e-14;
const MAX_REFINEMENT: usize = 8;

/// A factorized square matrix together with the original operator, used
/// for iterative refinement.
pub struct DirectSolver {
    matrix: CsrMatrix,
    factor: Factor,
}

impl DirectSolver {
    /// Cholesky factorization of a symmetric positive definite matrix.
    pub fn spd(a: &CsrMatrix) -> Result<Self> {
        let llt = lower_csc(a)
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::FactorizationFailure(format!("cholesky: {e:?}")))?;
        Ok(Self { matrix: a.clone(), factor: Factor::Llt(llt) })
    }

    /// Regularized LDLᵀ of a symmetric saddle-point matrix whose first
    /// `n_primal` unknowns have positive pivots and the rest negative ones.
    pub fn saddle(a: &CsrMatrix, n_primal: usize) -> Result<Self> {
        let n = a.nrows();
        let lower = lower_csc(a);
        let symbolic = symbolic_factor(a, &lower)?;
        let signs: Vec<i8> = (0..n).map(|i| if i < n_primal { 1 } else { -1 }).collect();
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let mut values = vec![0.0; symbolic.len_val()];
        let mut mem = MemBuffer::new(symbolic.factorize_numeric_ldlt_scratch::<f64>(Par::Seq, Default::default()));
        symbolic
            .factorize_numeric_ldlt(
                &mut values,
                lower.as_ref(),
                Side::Lower,
                LdltRegularization {
                    dynamic_regularization_signs: Some(&signs),
                    dynamic_regularization_delta: 1e-10 * scale,
                    dynamic_regularization_epsilon: 1e-14 * scale,
                },
                Par::Seq,
                MemStack::new(&mut mem),
                Default::default(),
            )
            .map_err(|e| Error::FactorizationFailure(format!("ldlt: {e:?}")))?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::FactorizationFailure("ldlt produced non-finite factor".into()));
        }
        Ok(Self { matrix: a.clone(), factor: Factor::Ldlt { symbolic, values } })
    }

    /// Sparse LU with partial pivoting.
    pub fn lu(a: &CsrMatrix) -> Result<Self> {
        let lu = full_csc(a).sp_lu().map_err(|e| Error::FactorizationFailure(format!("lu: {e:?}")))?;
        Ok(Self { matrix: a.clone(), factor: Factor::Lu(lu) })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Applies the factorization once, without refinement.
    pub fn apply_inverse(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.factor.solve_in_place(&mut x);
        x
    }

    /// Solves `A x = b` with iterative refinement. Returns the solution and
    /// its backward error.
    pub fn solve(&self, b: &[f64]) -> (Vec<f64>, f64) {
        let mut x = self.apply_inverse(b);
        let mut err = backward_error(&self.matrix, &x, b);
        for _ in 0..MAX_REFINEMENT {
            if !(err > REFINEMENT_TOL) {
                break;
            }
            let r = residual(&self.matrix, &x, b);
            let d = self.apply_inverse(&r);
            let cand: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
            let cand_err = backward_error(&self.matrix, &cand, b);
            if !(cand_err < err) {
                break;
            }
            x = cand;
            err = cand_err;
        }
        (x, err)
    }
}

/// Solves a symmetric saddle-point system: regularized LDLᵀ first, sparse LU
/// if refinement does not reach `tol`.
pub fn solve_saddle(
    a: &CsrMatrix,
    n_primal: usize,
    b: &[f64],
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let mut failure = String::new();
    match DirectSolver::saddle(a, n_primal) {
        Ok(s) => {
            let (x, err) = s.solve(b);
            if err <= tol && x.iter().all(|v| v.is_finite()) {
                return Ok((x, err));
            }
            log::info!("ldlt backward error {err:.2e} above {tol:.0e}, retrying with lu");
            failure = format!("ldlt backward error {err:.2e}");
        }
        Err(e) => log::info!("{e}, retrying with lu"),
    }
    let s = DirectSolver::lu(a)?;
    let (x, err) = s.solve(b);
    if err <= tol && x.iter().all(|v| v.is_finite()) {
        Ok((x, err))
    } else {
        Err(Error::SolveFailure(format!("{failure}; lu backward error {err:.2e}")))
    }
}

//! Irreversible exact oracles.
//!
//! Ordinary destructive algorithms over [`RatMatrix`] values, used two
//! ways: as independent correctness references for the reversible
//! kernels, and as the comparison point for resource accounting. Each
//! oracle logs what a naive reversible transform of it would have to
//! retain: one trace cell per destructive write (the Lecerf/Bennett
//! style history), without materializing the history itself.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RevError};
use crate::ratmat::RatMatrix;
use crate::rational::Rational;

/// Resource log of one oracle run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceReport {
    /// Overwrite events: cells a history-keeping transform would retain.
    pub destructive_writes: u64,
    /// Arithmetic operations (multiplies, divides, additions).
    pub irreversible_ops: u64,
    /// Peak simultaneously-held cells of the destructive run.
    pub peak_cells_irreversible: usize,
}

/// Plain triple-loop product. One destructive write of `C(i,j)` per
/// inner iteration, two arithmetic ops (multiply, add).
pub fn oracle_matmul(a: &RatMatrix, b: &RatMatrix) -> Result<(RatMatrix, TraceReport)> {
    let (m, n) = (a.n_rows(), a.n_cols());
    let p = b.n_cols();
    if n != b.n_rows() {
        return Err(RevError::ShapeMismatch(format!(
            "{m}x{n} * {}x{p}",
            b.n_rows()
        )));
    }
    let mut c = RatMatrix::zeros(m, p);
    for i in 0..m {
        for j in 0..p {
            for k in 0..n {
                let v = c.at(i, j) + &(a.at(i, k) * b.at(k, j));
                *c.at_mut(i, j) = v;
            }
        }
    }
    let writes = (m * n * p) as u64;
    let report = TraceReport {
        destructive_writes: writes,
        irreversible_ops: 2 * writes,
        peak_cells_irreversible: m * n + n * p + m * p,
    };
    Ok((c, report))
}

/// Gauss-Jordan inverse over an augmented [A | I] block.
///
/// With `pivoting` the usual row exchanges are performed and only a
/// truly singular matrix fails. Without it, the pivot is taken from
/// the diagonal as-is, which fails at row i exactly when the i+1-th
/// leading principal minor vanishes — the same condition under which
/// the reversible elimination raises SingularPivot, so this variant
/// classifies reversible failures.
pub fn oracle_inverse(a: &RatMatrix, pivoting: bool) -> Result<(RatMatrix, TraceReport)> {
    if !a.is_square() {
        return Err(RevError::ShapeMismatch(format!(
            "inverse of {}x{}",
            a.n_rows(),
            a.n_cols()
        )));
    }
    let n = a.n_rows();
    let mut writes: u64 = 0;
    let mut ops: u64 = 0;
    let mut aug = RatMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            *aug.at_mut(i, j) = a.at(i, j).clone();
        }
        *aug.at_mut(i, n + i) = Rational::one();
    }
    for i in 0..n {
        if aug.at(i, i).is_zero() {
            if !pivoting {
                return Err(RevError::ZeroPivot { row: i });
            }
            let swap_with = (i + 1..n).find(|&r| !aug.at(r, i).is_zero());
            match swap_with {
                Some(r) => {
                    for c in 0..2 * n {
                        let tmp = aug.at(i, c).clone();
                        *aug.at_mut(i, c) = aug.at(r, c).clone();
                        *aug.at_mut(r, c) = tmp;
                    }
                }
                None => return Err(RevError::Singular),
            }
        }
        let pivot = aug.at(i, i).clone();
        for c in 0..2 * n {
            let v = aug.at(i, c) / &pivot;
            *aug.at_mut(i, c) = v;
            writes += 1;
            ops += 1;
        }
        for r in 0..n {
            if r == i || aug.at(r, i).is_zero() {
                continue;
            }
            let factor = aug.at(r, i).clone();
            for c in 0..2 * n {
                let v = aug.at(r, c) - &(&factor * aug.at(i, c));
                *aug.at_mut(r, c) = v;
                writes += 1;
                ops += 2;
            }
        }
    }
    let mut inv = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            *inv.at_mut(i, j) = aug.at(i, n + j).clone();
        }
    }
    let report = TraceReport {
        destructive_writes: writes,
        irreversible_ops: ops,
        // the input copy plus the augmented working block
        peak_cells_irreversible: 3 * n * n,
    };
    Ok((inv, report))
}

/// Solves `A x = b` exactly with partially pivoted elimination.
pub fn solve_pivoted(a: &RatMatrix, b: &[Rational]) -> Result<Vec<Rational>> {
    if !a.is_square() || a.n_rows() != b.len() {
        return Err(RevError::ShapeMismatch(format!(
            "solve {}x{} against length-{}",
            a.n_rows(),
            a.n_cols(),
            b.len()
        )));
    }
    let n = a.n_rows();
    let mut work = a.clone();
    let mut rhs = b.to_vec();
    for i in 0..n {
        if work.at(i, i).is_zero() {
            let r = (i + 1..n)
                .find(|&r| !work.at(r, i).is_zero())
                .ok_or(RevError::Singular)?;
            for c in 0..n {
                let tmp = work.at(i, c).clone();
                *work.at_mut(i, c) = work.at(r, c).clone();
                *work.at_mut(r, c) = tmp;
            }
            rhs.swap(i, r);
        }
        for r in i + 1..n {
            let factor = work.at(r, i).checked_div(work.at(i, i)).unwrap();
            if factor.is_zero() {
                continue;
            }
            for c in i..n {
                let v = work.at(r, c) - &(&factor * work.at(i, c));
                *work.at_mut(r, c) = v;
            }
            let v = &rhs[r] - &(&factor * &rhs[i]);
            rhs[r] = v;
        }
    }
    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i].clone();
        for (j, solved) in x.iter().enumerate().skip(i + 1) {
            acc = &acc - &(work.at(i, j) * solved);
        }
        x[i] = acc
            .checked_div(work.at(i, i))
            .ok_or(RevError::Singular)?;
    }
    Ok(x)
}

/// Closed-form least squares on the normal equations, solved with the
/// pivoted oracle: theta = (X·Xᵀ + nλI)⁻¹ X·y. `x` is the full d×n
/// feature matrix (columns are points, bias row already appended if
/// any); the returned vector has length d.
pub fn oracle_ols(x: &RatMatrix, y: &[Rational], lambda: &Rational) -> Result<Vec<Rational>> {
    let (d, n) = (x.n_rows(), x.n_cols());
    if y.len() != n {
        return Err(RevError::ShapeMismatch(format!(
            "{n} data columns but {} targets",
            y.len()
        )));
    }
    if lambda.is_negative() {
        return Err(RevError::Parse("lambda must be nonnegative".into()));
    }
    let mut gram = x.mul(&x.transpose())?;
    if !lambda.is_zero() {
        gram = gram.add_diagonal(&(&Rational::from_usize(n) * lambda));
    }
    let mut v = vec![Rational::zero(); d];
    for (i, moment) in v.iter_mut().enumerate() {
        for (j, target) in y.iter().enumerate() {
            *moment = &*moment + &(x.at(i, j) * target);
        }
    }
    solve_pivoted(&gram, &v)
}

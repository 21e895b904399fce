//! Reversible matrix kernels.
//!
//! A [`MatrixHandle`] is a grid of arena cells; [`build_matmul`] emits
//! the reversible product program over three such grids. The multiply
//! follows the compute-copy-uncompute shape at the innermost level:
//! for every (i, j, k) the partial product lands in a single shared
//! temp cell, is accumulated into C(i,j), and is immediately
//! uncomputed, so the whole product needs exactly one transient cell
//! regardless of dimensions.

use crate::arena::{Arena, CellId, Primitive, ResourceReport};
use crate::error::{Result, RevError};
use crate::program::{run, Direction, RevProgram};
use crate::ratmat::RatMatrix;
use crate::rational::Rational;

/// Grid of cells with a zero-cost transpose view.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixHandle {
    rows: usize,
    cols: usize,
    transposed: bool,
    /// Row-major for the original (untransposed) orientation.
    cells: Vec<CellId>,
}

impl MatrixHandle {
    /// Allocates a rows×cols grid of zero cells.
    pub fn alloc(arena: &mut Arena, rows: usize, cols: usize) -> MatrixHandle {
        MatrixHandle {
            rows,
            cols,
            transposed: false,
            cells: arena.alloc_n(rows * cols),
        }
    }

    /// Allocates a grid and loads values into it with AddConst steps
    /// (loading is itself a reversible program fragment).
    pub fn load(arena: &mut Arena, values: &RatMatrix) -> Result<MatrixHandle> {
        let handle = MatrixHandle::alloc(arena, values.n_rows(), values.n_cols());
        for i in 0..values.n_rows() {
            for j in 0..values.n_cols() {
                arena.step(&Primitive::AddConst {
                    dst: handle.cell(i, j),
                    k: values.at(i, j).clone(),
                })?;
            }
        }
        Ok(handle)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell(&self, i: usize, j: usize) -> CellId {
        debug_assert!(i < self.rows && j < self.cols);
        if self.transposed {
            self.cells[j * self.rows + i]
        } else {
            self.cells[i * self.cols + j]
        }
    }

    /// Swapped-dims view over the same cells; no arena operation runs.
    pub fn transpose_view(&self) -> MatrixHandle {
        MatrixHandle {
            rows: self.cols,
            cols: self.rows,
            transposed: !self.transposed,
            cells: self.cells.clone(),
        }
    }

    pub fn all_cells(&self) -> &[CellId] {
        &self.cells
    }

    pub fn overlaps(&self, other: &MatrixHandle) -> bool {
        self.cells.iter().any(|c| other.cells.contains(c))
    }

    pub fn to_values(&self, arena: &Arena) -> Result<RatMatrix> {
        let mut out = RatMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(i, j) = arena.value(self.cell(i, j))?;
            }
        }
        Ok(out)
    }

    /// Frees every cell; all must read zero.
    pub fn free(&self, arena: &mut Arena) -> Result<()> {
        arena.free_all(&self.cells)
    }
}

/// Builds the reversible product C += A·B.
///
/// C must be disjoint from A and B (A and B may share cells, which is
/// how X·Xᵀ runs over transpose views) and must be all-zero when the
/// program runs if C is to equal the product. Returns the program and
/// the single shared temp cell, which the program always returns to
/// zero; the caller frees it. Forward cost is exactly 3·m·n·p steps.
pub fn build_matmul(
    arena: &mut Arena,
    a: &MatrixHandle,
    b: &MatrixHandle,
    c: &MatrixHandle,
) -> Result<(RevProgram, CellId)> {
    let (m, n, p) = (a.rows(), a.cols(), b.cols());
    if b.rows() != n || c.rows() != m || c.cols() != p {
        return Err(RevError::ShapeMismatch(format!(
            "{m}x{n} * {}x{p} -> {}x{}",
            b.rows(),
            c.rows(),
            c.cols()
        )));
    }
    if c.overlaps(a) || c.overlaps(b) {
        return Err(RevError::Overlap(
            "product target shares cells with an input".into(),
        ));
    }
    let temp = arena.alloc();
    let mut steps = Vec::with_capacity(m * n * p);
    for i in 0..m {
        for j in 0..p {
            for k in 0..n {
                let compute = RevProgram::prim(Primitive::AddMul {
                    dst: temp,
                    a: a.cell(i, k),
                    b: b.cell(k, j),
                });
                let copy = RevProgram::prim(Primitive::AddScaled {
                    dst: c.cell(i, j),
                    src: temp,
                    k: Rational::one(),
                });
                steps.push(RevProgram::ccu(compute, copy)?);
            }
        }
    }
    Ok((RevProgram::seq(steps), temp))
}

/// Forward adds `k` to every diagonal entry of G; backward subtracts.
pub fn build_add_scaled_identity(g: &MatrixHandle, k: &Rational) -> Result<RevProgram> {
    if g.rows() != g.cols() {
        return Err(RevError::ShapeMismatch(format!(
            "diagonal shift of {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    let steps = (0..g.rows())
        .map(|i| {
            RevProgram::prim(Primitive::AddConst {
                dst: g.cell(i, i),
                k: k.clone(),
            })
        })
        .collect();
    Ok(RevProgram::seq(steps))
}

/// Convenience driver: allocates the product target, runs the forward
/// multiply, and frees the temp, reporting the run's resources.
pub fn multiply(
    arena: &mut Arena,
    a: &MatrixHandle,
    b: &MatrixHandle,
) -> Result<(MatrixHandle, ResourceReport)> {
    let meter = arena.begin_meter();
    let c = MatrixHandle::alloc(arena, a.rows(), b.cols());
    let outcome = (|| {
        let (prog, temp) = build_matmul(arena, a, b, &c)?;
        run(arena, &prog, Direction::Forward)?;
        arena.free(temp)
    })();
    let report = arena.end_meter(meter);
    outcome.map(|()| (c, report))
}

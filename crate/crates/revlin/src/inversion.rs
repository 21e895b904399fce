//! Reversible matrix inversion by row-pull Gaussian elimination.
//!
//! Classical elimination pushes updates from each pivot row into all
//! later rows, overwriting them in place. Here the dependency is
//! turned around: row i *pulls* the accumulated updates from rows
//! 0..i-1 into scratch, normalizes, and deposits the finished row
//! into the echelon buffers via a compute-copy-uncompute node. Each
//! row's subroutine has O(n) output, so its multipliers and scratch
//! are recomputed and erased instead of being stored, which is what
//! keeps the transient footprint linear in n.
//!
//! There is no pivoting: a zero pivot is a hard [`SingularPivot`]
//! error, raised both for genuinely singular inputs and for
//! invertible inputs with a vanishing leading principal minor. The
//! pivoted oracle in `baselines` tells those cases apart.
//!
//! [`SingularPivot`]: RevError::SingularPivot

use crate::arena::{Arena, CellId, Primitive, ResourceReport};
use crate::error::{Result, RevError};
use crate::kernels::MatrixHandle;
use crate::program::{run, Direction, RevProgram};
use crate::rational::Rational;

/// Buffers for one inversion: the input A plus the row-echelon
/// intermediate R, the phase-1 inverse-row intermediate P, the final
/// inverse, and four length-n scratch vectors. R and P live only
/// between the two phases; the pipeline's outer uncompute returns
/// them to zero.
#[derive(Debug, Clone)]
pub struct InversionPlan {
    n: usize,
    a: MatrixHandle,
    r: MatrixHandle,
    p: MatrixHandle,
    inv: MatrixHandle,
    scratch_row: Vec<CellId>,
    scratch_inv_row: Vec<CellId>,
    multipliers: Vec<CellId>,
    /// Phase-2 working row. Distinct from scratch_row so that the
    /// back-substitution legs touch nothing phase 1 touched.
    back_row: Vec<CellId>,
}

impl InversionPlan {
    pub fn new(arena: &mut Arena, a: &MatrixHandle) -> Result<InversionPlan> {
        if a.rows() != a.cols() {
            return Err(RevError::ShapeMismatch(format!(
                "inverse of {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        let n = a.rows();
        Ok(InversionPlan {
            n,
            a: a.clone(),
            r: MatrixHandle::alloc(arena, n, n),
            p: MatrixHandle::alloc(arena, n, n),
            inv: MatrixHandle::alloc(arena, n, n),
            scratch_row: arena.alloc_n(n),
            scratch_inv_row: arena.alloc_n(n),
            multipliers: arena.alloc_n(n),
            back_row: arena.alloc_n(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn inv(&self) -> &MatrixHandle {
        &self.inv
    }

    pub fn r(&self) -> &MatrixHandle {
        &self.r
    }

    pub fn p(&self) -> &MatrixHandle {
        &self.p
    }

    /// Phase-1 subroutine for row i. The compute leg pulls A's row i
    /// through all previously reduced rows and normalizes it by the
    /// pivot; the copy leg deposits the reduced row pair into R and P;
    /// the uncompute leg erases scratch and multipliers. A zero pivot
    /// surfaces as NonInvertible inside the labeled normalize block
    /// and is mapped to SingularPivot by the drivers.
    pub fn build_row_reduce(&self, i: usize) -> Result<RevProgram> {
        let n = self.n;
        let one = Rational::one();
        let mut compute = Vec::new();
        for k in 0..n {
            compute.push(RevProgram::prim(Primitive::AddScaled {
                dst: self.scratch_row[k],
                src: self.a.cell(i, k),
                k: one.clone(),
            }));
        }
        compute.push(RevProgram::prim(Primitive::AddConst {
            dst: self.scratch_inv_row[i],
            k: one.clone(),
        }));
        for j in 0..i {
            // R(j,j) = 1 after row j's normalization, so the divide is
            // exact and cheap; it still must be a division to mirror
            // the unnormalized general form.
            compute.push(RevProgram::prim(Primitive::AddDiv {
                dst: self.multipliers[j],
                num: self.scratch_row[j],
                den: self.r.cell(j, j),
            }));
            for k in 0..n {
                compute.push(RevProgram::prim(Primitive::SubMul {
                    dst: self.scratch_row[k],
                    a: self.multipliers[j],
                    b: self.r.cell(j, k),
                }));
            }
            for k in 0..n {
                compute.push(RevProgram::prim(Primitive::SubMul {
                    dst: self.scratch_inv_row[k],
                    a: self.multipliers[j],
                    b: self.p.cell(j, k),
                }));
            }
        }
        let mut normalize = vec![RevProgram::prim(Primitive::AddScaled {
            dst: self.multipliers[i],
            src: self.scratch_row[i],
            k: one.clone(),
        })];
        // entries left of the pivot are already zero; the inverse row
        // is generally dense, so it is rescaled across all n columns
        for k in i..n {
            normalize.push(RevProgram::prim(Primitive::Unscale {
                dst: self.scratch_row[k],
                by: self.multipliers[i],
            }));
        }
        for k in 0..n {
            normalize.push(RevProgram::prim(Primitive::Unscale {
                dst: self.scratch_inv_row[k],
                by: self.multipliers[i],
            }));
        }
        compute.push(RevProgram::seq(normalize).with_label(format!("normalize r{i}")));

        let mut copy = Vec::new();
        for k in 0..n {
            copy.push(RevProgram::prim(Primitive::AddScaled {
                dst: self.r.cell(i, k),
                src: self.scratch_row[k],
                k: one.clone(),
            }));
        }
        for k in 0..n {
            copy.push(RevProgram::prim(Primitive::AddScaled {
                dst: self.p.cell(i, k),
                src: self.scratch_inv_row[k],
                k: one.clone(),
            }));
        }
        RevProgram::ccu(RevProgram::seq(compute), RevProgram::seq(copy))
            .map(|prog| prog.with_label(format!("row_reduce {i}")))
    }

    /// Phase-2 subroutine for row i (built for i = n-1 down to 0).
    /// Solves R·Inv = P one row at a time from the bottom: the compute
    /// leg loads P's row i and subtracts R(i,j)·Inv(j,·) for every
    /// j > i — the pivots are all 1, so no division occurs — and the
    /// copy leg deposits the finished row into Inv.
    pub fn build_back_substitute(&self, i: usize) -> Result<RevProgram> {
        let n = self.n;
        let one = Rational::one();
        let mut compute = Vec::new();
        for k in 0..n {
            compute.push(RevProgram::prim(Primitive::AddScaled {
                dst: self.back_row[k],
                src: self.p.cell(i, k),
                k: one.clone(),
            }));
        }
        for j in i + 1..n {
            for k in 0..n {
                compute.push(RevProgram::prim(Primitive::SubMul {
                    dst: self.back_row[k],
                    a: self.r.cell(i, j),
                    b: self.inv.cell(j, k),
                }));
            }
        }
        let copy = (0..n)
            .map(|k| {
                RevProgram::prim(Primitive::AddScaled {
                    dst: self.inv.cell(i, k),
                    src: self.back_row[k],
                    k: one.clone(),
                })
            })
            .collect();
        RevProgram::ccu(RevProgram::seq(compute), RevProgram::seq(copy))
            .map(|prog| prog.with_label(format!("back_substitute {i}")))
    }

    /// The full two-phase pipeline as one compute-copy-uncompute node:
    /// phase 1 (row reduction) is the compute leg, phase 2 (back
    /// substitution into Inv) is the copy leg, and the closing
    /// uncompute re-runs phase 1 backwards to erase R and P. Total
    /// forward cost is 5n³ + 14n² + 8n primitive steps.
    pub fn build(&self) -> Result<RevProgram> {
        let phase1 = RevProgram::seq(
            (0..self.n)
                .map(|i| self.build_row_reduce(i))
                .collect::<Result<_>>()?,
        );
        let phase2 = RevProgram::seq(
            (0..self.n)
                .rev()
                .map(|i| self.build_back_substitute(i))
                .collect::<Result<_>>()?,
        );
        RevProgram::ccu(phase1, phase2).map(|prog| prog.with_label("invert"))
    }

    /// Frees the four scratch vectors (zero after any completed run).
    pub fn release_scratch(&self, arena: &mut Arena) -> Result<()> {
        arena.free_all(&self.scratch_row)?;
        arena.free_all(&self.scratch_inv_row)?;
        arena.free_all(&self.multipliers)?;
        arena.free_all(&self.back_row)
    }

    /// Frees R and P (zero after a completed forward run).
    pub fn release_intermediates(&self, arena: &mut Arena) -> Result<()> {
        self.r.free(arena)?;
        self.p.free(arena)
    }
}

/// Allocates a plan and builds its pipeline program.
pub fn build_inverse(arena: &mut Arena, a: &MatrixHandle) -> Result<(RevProgram, InversionPlan)> {
    let plan = InversionPlan::new(arena, a)?;
    let prog = plan.build()?;
    Ok((prog, plan))
}

/// Rewrites a zero-pivot failure (NonInvertible inside a labeled
/// normalize block) into SingularPivot with the failing row.
pub(crate) fn map_pivot_error(err: RevError) -> RevError {
    if matches!(err.root_cause(), RevError::NonInvertible { .. }) {
        if let Some(row) = err
            .label()
            .and_then(|l| l.strip_prefix("normalize r"))
            .and_then(|digits| digits.parse::<usize>().ok())
        {
            return RevError::SingularPivot { row };
        }
    }
    err
}

/// Full driver: builds the plan, runs it forward, frees the scratch
/// vectors inside the metered window and the zeroed R/P buffers after
/// it. On success the arena holds A (untouched) and the returned
/// inverse; the report's transients cover exactly the 4n scratch
/// cells.
pub fn invert_matrix(
    arena: &mut Arena,
    a: &MatrixHandle,
) -> Result<(MatrixHandle, ResourceReport)> {
    let meter = arena.begin_meter();
    let outcome = (|| {
        let (prog, plan) = build_inverse(arena, a)?;
        run(arena, &prog, Direction::Forward).map_err(map_pivot_error)?;
        plan.release_scratch(arena)?;
        Ok(plan)
    })();
    let report = arena.end_meter(meter);
    let plan = outcome?;
    plan.release_intermediates(arena)?;
    Ok((plan.inv.clone(), report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::oracle_inverse;
    use crate::instances;
    use crate::program::verify_roundtrip;
    use crate::ratmat::RatMatrix;

    fn m(text: &str) -> RatMatrix {
        text.parse().unwrap()
    }

    fn invert_values(values: &RatMatrix) -> Result<RatMatrix> {
        let mut arena = Arena::new();
        let a = MatrixHandle::load(&mut arena, values)?;
        let (inv, _) = invert_matrix(&mut arena, &a)?;
        inv.to_values(&arena)
    }

    #[test]
    fn identity_inverts_to_identity() {
        for n in 1..=4 {
            let eye = RatMatrix::identity(n);
            assert_eq!(invert_values(&eye).unwrap(), eye, "n={n}");
        }
    }

    #[test]
    fn known_two_by_two_inverses() {
        assert_eq!(invert_values(&m("1 2\n3 4\n")).unwrap(), m("-2 1\n3/2 -1/2\n"));
        assert_eq!(invert_values(&m("1 1\n0 1\n")).unwrap(), m("1 -1\n0 1\n"));
        assert_eq!(invert_values(&m("2\n")).unwrap(), m("1/2\n"));
    }

    #[test]
    fn zero_leading_pivot_is_singular_pivot() {
        let err = invert_values(&m("0 1\n1 0\n")).unwrap_err();
        assert_eq!(err, RevError::SingularPivot { row: 0 });
        let err = invert_values(&m("1 2\n2 4\n")).unwrap_err();
        assert_eq!(err, RevError::SingularPivot { row: 1 });
    }

    #[test]
    fn random_inverses_are_exact_and_clean() {
        let mut rng = instances::rng(21);
        for n in 1..=6 {
            for _ in 0..6 {
                let values = instances::random_minor_friendly(&mut rng, n);
                let mut arena = Arena::new();
                let a = MatrixHandle::load(&mut arena, &values).unwrap();
                let (inv, report) = invert_matrix(&mut arena, &a).unwrap();
                let inv_values = inv.to_values(&arena).unwrap();
                assert_eq!(
                    values.mul(&inv_values).unwrap(),
                    RatMatrix::identity(n),
                    "A·Inv != I for n={n}"
                );
                assert_eq!(
                    inv_values.mul(&values).unwrap(),
                    RatMatrix::identity(n),
                    "Inv·A != I for n={n}"
                );
                assert_eq!(a.to_values(&arena).unwrap(), values);
                assert_eq!(report.garbage_cells, 0);
                // only A and Inv remain allocated
                assert_eq!(arena.live_count(), 2 * n * n);
                // cross-check against the pivoted oracle
                let (oracle, _) = oracle_inverse(&values, true).unwrap();
                assert_eq!(inv_values, oracle);
            }
        }
    }

    #[test]
    fn pipeline_roundtrip_restores_everything() {
        let mut rng = instances::rng(22);
        let values = instances::random_minor_friendly(&mut rng, 4);
        let mut arena = Arena::new();
        let a = MatrixHandle::load(&mut arena, &values).unwrap();
        let (prog, plan) = build_inverse(&mut arena, &a).unwrap();
        let snap = arena.snapshot();
        let trip = verify_roundtrip(&mut arena, &prog).unwrap();
        assert_eq!(trip.forward.primitive_ops, trip.backward.primitive_ops);
        assert_eq!(trip.forward.garbage_cells, 0);
        assert!(snap.diff(&arena).is_empty());
        plan.release_scratch(&mut arena).unwrap();
        plan.release_intermediates(&mut arena).unwrap();
        plan.inv().free(&mut arena).unwrap();
    }

    #[test]
    fn forward_cost_is_the_closed_form() {
        let mut arena = Arena::new();
        for n in 1..=6 {
            let a = MatrixHandle::load(&mut arena, &RatMatrix::identity(n)).unwrap();
            let (prog, _) = build_inverse(&mut arena, &a).unwrap();
            let n3 = (n * n * n) as u64;
            let n2 = (n * n) as u64;
            assert_eq!(
                prog.forward_ops(),
                5 * n3 + 14 * n2 + 8 * n as u64,
                "n={n}"
            );
        }
    }

    #[test]
    fn transient_footprint_is_linear() {
        let mut rng = instances::rng(23);
        for n in [2usize, 4, 8] {
            let values = instances::random_minor_friendly(&mut rng, n);
            let mut arena = Arena::new();
            let a = MatrixHandle::load(&mut arena, &values).unwrap();
            let (_, report) = invert_matrix(&mut arena, &a).unwrap();
            // four scratch vectors of length n beyond the four n×n buffers
            assert_eq!(report.transient_peak, 4 * n, "n={n}");
            assert_eq!(report.persistent_cells, 4 * n * n, "n={n}");
            assert_eq!(
                report.primitive_ops,
                (5 * n * n * n + 14 * n * n + 8 * n) as u64
            );
        }
    }

    #[test]
    fn first_row_reduce_normalizes_row_one() {
        let values = m("2 4\n5 3\n");
        let mut arena = Arena::new();
        let a = MatrixHandle::load(&mut arena, &values).unwrap();
        let plan = InversionPlan::new(&mut arena, &a).unwrap();
        let rr0 = plan.build_row_reduce(0).unwrap();
        run(&mut arena, &rr0, Direction::Forward).unwrap();
        assert_eq!(
            plan.r().to_values(&arena).unwrap().row(0),
            &[Rational::one(), Rational::from_integer(2)]
        );
        assert_eq!(
            plan.p().to_values(&arena).unwrap().row(0),
            &[Rational::ratio(1, 2), Rational::zero()]
        );
        // scratch and multipliers are already clean
        plan_scratch_is_zero(&plan, &arena);
    }

    fn plan_scratch_is_zero(plan: &InversionPlan, arena: &Arena) {
        for &c in plan
            .scratch_row
            .iter()
            .chain(&plan.scratch_inv_row)
            .chain(&plan.multipliers)
            .chain(&plan.back_row)
        {
            assert!(arena.read(c).unwrap().is_zero());
        }
    }

    #[test]
    fn phase_one_produces_unit_upper_echelon() {
        let mut rng = instances::rng(24);
        let n = 4;
        let values = instances::random_minor_friendly(&mut rng, n);
        let mut arena = Arena::new();
        let a = MatrixHandle::load(&mut arena, &values).unwrap();
        let plan = InversionPlan::new(&mut arena, &a).unwrap();
        let phase1 = RevProgram::seq(
            (0..n)
                .map(|i| plan.build_row_reduce(i).unwrap())
                .collect(),
        );
        run(&mut arena, &phase1, Direction::Forward).unwrap();
        let r = plan.r().to_values(&arena).unwrap();
        for i in 0..n {
            assert_eq!(r.at(i, i), &Rational::one());
            for j in 0..i {
                assert!(r.at(i, j).is_zero(), "R({i},{j}) nonzero");
            }
        }
        // the same row operations applied to I: P·A = R
        let p = plan.p().to_values(&arena).unwrap();
        assert_eq!(p.mul(&values).unwrap(), r);
        run(&mut arena, &phase1, Direction::Backward).unwrap();
        plan_scratch_is_zero(&plan, &arena);
    }

    #[test]
    fn pivot_error_mapping_is_specific() {
        let unrelated = RevError::Singular;
        assert_eq!(map_pivot_error(unrelated.clone()), unrelated);
        let wrapped = RevError::Program {
            path: "0/compute/5".into(),
            label: Some("normalize r2".into()),
            source: Box::new(RevError::NonInvertible { multiplier: CellId(9) }),
        };
        assert_eq!(map_pivot_error(wrapped), RevError::SingularPivot { row: 2 });
    }
}

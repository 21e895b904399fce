//! Reversible least-squares and ridge regression.
//!
//! The fit pipeline is one large compute-copy-uncompute node. Its
//! compute leg forms the Gram matrix G = X·Xᵀ over transpose views,
//! optionally shifts the diagonal by n·λ, inverts G with the row-pull
//! elimination, forms V = X·Yᵀ, and multiplies out the candidate
//! theta; the copy leg accumulates theta into its output cells, and
//! the closing uncompute erases every intermediate. After a fit the
//! arena holds X, Y, and theta, nothing else.

use crate::arena::{Arena, CellId, Primitive, ResourceReport};
use crate::error::{Result, RevError};
use crate::inversion::{map_pivot_error, InversionPlan};
use crate::kernels::{build_add_scaled_identity, build_matmul, MatrixHandle};
use crate::program::{run, Direction, RevProgram};
use crate::ratmat::RatMatrix;
use crate::rational::Rational;

/// A dataset in the engine's layout: X is d×n with one data point per
/// column (a trailing all-ones row when `bias` is set), Y is 1×n.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    x: MatrixHandle,
    y: MatrixHandle,
    lambda: Rational,
    bias: bool,
}

impl RegressionProblem {
    /// Builds a problem from a ready feature matrix (bias row, if any,
    /// already appended as the last row).
    pub fn from_full_x(
        arena: &mut Arena,
        x: &RatMatrix,
        y: &[Rational],
        lambda: Rational,
        bias: bool,
    ) -> Result<RegressionProblem> {
        let (d, n) = (x.n_rows(), x.n_cols());
        if n == 0 || d == 0 {
            return Err(RevError::ShapeMismatch("empty problem".into()));
        }
        if y.len() != n {
            return Err(RevError::ShapeMismatch(format!(
                "{n} data columns but {} targets",
                y.len()
            )));
        }
        if lambda.is_negative() {
            return Err(RevError::Parse("lambda must be nonnegative".into()));
        }
        if bias && (0..n).any(|j| x.at(d - 1, j) != &Rational::one()) {
            return Err(RevError::ShapeMismatch(
                "bias flag set but the last feature row is not all ones".into(),
            ));
        }
        let x = MatrixHandle::load(arena, x)?;
        let y_values = RatMatrix::from_rows(vec![y.to_vec()])?;
        let y = MatrixHandle::load(arena, &y_values)?;
        Ok(RegressionProblem { x, y, lambda, bias })
    }

    /// Builds a problem from points in row form (one point per row,
    /// the usual CSV orientation), transposing into the columns-as-
    /// points layout and appending the all-ones row when `bias` is
    /// set. `points` may have zero columns for a bias-only model.
    pub fn from_points(
        arena: &mut Arena,
        points: &[Vec<Rational>],
        y: &[Rational],
        lambda: Rational,
        bias: bool,
    ) -> Result<RegressionProblem> {
        let n = points.len();
        if n == 0 {
            return Err(RevError::ShapeMismatch("no data points".into()));
        }
        let features = points[0].len();
        if points.iter().any(|p| p.len() != features) {
            return Err(RevError::ShapeMismatch(
                "points have differing feature counts".into(),
            ));
        }
        if features == 0 && !bias {
            return Err(RevError::ShapeMismatch(
                "zero features and no bias: nothing to fit".into(),
            ));
        }
        let d = features + usize::from(bias);
        let mut x = RatMatrix::zeros(d, n);
        for (j, point) in points.iter().enumerate() {
            for (i, value) in point.iter().enumerate() {
                *x.at_mut(i, j) = value.clone();
            }
            if bias {
                *x.at_mut(d - 1, j) = Rational::one();
            }
        }
        RegressionProblem::from_full_x(arena, &x, y, lambda, bias)
    }

    pub fn x(&self) -> &MatrixHandle {
        &self.x
    }

    pub fn y(&self) -> &MatrixHandle {
        &self.y
    }

    pub fn lambda(&self) -> &Rational {
        &self.lambda
    }

    pub fn bias(&self) -> bool {
        self.bias
    }

    /// Total rows of X, including the bias row if present.
    pub fn d(&self) -> usize {
        self.x.rows()
    }

    pub fn n(&self) -> usize {
        self.x.cols()
    }

    /// Rows of X that carry real features (excludes the bias row).
    pub fn feature_count(&self) -> usize {
        self.d() - usize::from(self.bias)
    }
}

/// Fit output: theta spans all d coordinates (the bias coordinate is
/// the last entry and is also surfaced as theta0).
#[derive(Debug, Clone)]
pub struct FittedModel {
    theta: MatrixHandle,
    theta0: Rational,
    report: ResourceReport,
    bias: bool,
}

impl FittedModel {
    pub fn theta(&self) -> &MatrixHandle {
        &self.theta
    }

    pub fn theta0(&self) -> &Rational {
        &self.theta0
    }

    pub fn report(&self) -> &ResourceReport {
        &self.report
    }

    pub fn theta_values(&self, arena: &Arena) -> Result<Vec<Rational>> {
        (0..self.theta.rows())
            .map(|i| arena.value(self.theta.cell(i, 0)))
            .collect()
    }

    /// Theta restricted to real features (bias coordinate dropped).
    pub fn feature_theta(&self, arena: &Arena) -> Result<Vec<Rational>> {
        let mut all = self.theta_values(arena)?;
        if self.bias {
            all.pop();
        }
        Ok(all)
    }
}

/// Buffers of one fit pipeline. Everything except `theta` reads zero
/// after a forward run and is freed by `release_scratch`.
pub struct FitPlan {
    g: MatrixHandle,
    v: MatrixHandle,
    theta_stage: MatrixHandle,
    theta: MatrixHandle,
    inversion: InversionPlan,
    temps: Vec<CellId>,
}

impl FitPlan {
    pub fn theta(&self) -> &MatrixHandle {
        &self.theta
    }

    pub fn release_scratch(&self, arena: &mut Arena) -> Result<()> {
        arena.free_all(&self.temps)?;
        self.g.free(arena)?;
        self.v.free(arena)?;
        self.theta_stage.free(arena)?;
        self.inversion.release_scratch(arena)?;
        self.inversion.release_intermediates(arena)?;
        self.inversion.inv().free(arena)
    }
}

fn build_fit(arena: &mut Arena, prob: &RegressionProblem) -> Result<(RevProgram, FitPlan)> {
    let d = prob.d();
    let g = MatrixHandle::alloc(arena, d, d);
    let v = MatrixHandle::alloc(arena, d, 1);
    let theta_stage = MatrixHandle::alloc(arena, d, 1);
    let theta = MatrixHandle::alloc(arena, d, 1);

    let xt = prob.x.transpose_view();
    let yt = prob.y.transpose_view();
    let (gram_prog, gram_temp) = build_matmul(arena, &prob.x, &xt, &g)?;
    let mut compute = vec![gram_prog.with_label("gram")];
    if !prob.lambda.is_zero() {
        let shift = &Rational::from_usize(prob.n()) * &prob.lambda;
        compute.push(build_add_scaled_identity(&g, &shift)?.with_label("ridge shift"));
    }
    let (prog, plan) = crate::inversion::build_inverse(arena, &g)?;
    compute.push(prog);
    let (v_prog, v_temp) = build_matmul(arena, &prob.x, &yt, &v)?;
    compute.push(v_prog.with_label("moment"));
    let (stage_prog, stage_temp) = build_matmul(arena, plan.inv(), &v, &theta_stage)?;
    compute.push(stage_prog.with_label("solve"));

    let copy = RevProgram::seq(
        (0..d)
            .map(|i| {
                RevProgram::prim(Primitive::AddScaled {
                    dst: theta.cell(i, 0),
                    src: theta_stage.cell(i, 0),
                    k: Rational::one(),
                })
            })
            .collect(),
    );
    let pipeline = RevProgram::ccu(RevProgram::seq(compute), copy)?.with_label("fit");
    Ok((
        pipeline,
        FitPlan {
            g,
            v,
            theta_stage,
            theta,
            inversion: plan,
            temps: vec![gram_temp, v_temp, stage_temp],
        },
    ))
}

/// Least-squares pipeline; the problem must carry lambda = 0.
pub fn build_ols(arena: &mut Arena, prob: &RegressionProblem) -> Result<(RevProgram, FitPlan)> {
    assert!(prob.lambda.is_zero(), "build_ols requires lambda = 0");
    build_fit(arena, prob)
}

/// Ridge pipeline; identical to OLS with the n·λ diagonal shift
/// inserted before the inversion. Lambda must be positive.
pub fn build_ridge(arena: &mut Arena, prob: &RegressionProblem) -> Result<(RevProgram, FitPlan)> {
    assert!(!prob.lambda.is_zero(), "build_ridge requires lambda > 0");
    build_fit(arena, prob)
}

/// Runs the fit for the problem (OLS when λ = 0, ridge otherwise),
/// frees all intermediates, and returns the model. The report covers
/// the whole fit including buffer setup and teardown, so its
/// persistent cells are X, Y, and theta only.
pub fn fit(arena: &mut Arena, prob: &RegressionProblem) -> Result<FittedModel> {
    let meter = arena.begin_meter();
    let outcome = (|| {
        let (prog, plan) = build_fit(arena, prob)?;
        run(arena, &prog, Direction::Forward).map_err(map_pivot_error)?;
        plan.release_scratch(arena)?;
        Ok(plan)
    })();
    let report = arena.end_meter(meter);
    let plan = outcome?;
    let theta = plan.theta.clone();
    let theta0 = if prob.bias {
        arena.value(theta.cell(prob.d() - 1, 0))?
    } else {
        Rational::zero()
    };
    Ok(FittedModel {
        theta,
        theta0,
        report,
        bias: prob.bias,
    })
}

/// θᵀx + θ₀ over the feature coordinates.
pub fn predict(arena: &Arena, x: &[Rational], model: &FittedModel) -> Result<Rational> {
    let features = model.feature_theta(arena)?;
    if x.len() != features.len() {
        return Err(RevError::ShapeMismatch(format!(
            "point has {} features, model has {}",
            x.len(),
            features.len()
        )));
    }
    let mut acc = model.theta0.clone();
    for (theta_i, x_i) in features.iter().zip(x) {
        acc = &acc + &(theta_i * x_i);
    }
    Ok(acc)
}

/// Mean squared error (1/n)·Σ (θᵀx⁽ⁱ⁾ + θ₀ − y⁽ⁱ⁾)². Pure observer:
/// reads the problem's cells, mutates nothing.
pub fn evaluate_loss(
    arena: &Arena,
    prob: &RegressionProblem,
    theta: &[Rational],
    theta0: &Rational,
) -> Result<Rational> {
    if theta.len() != prob.feature_count() {
        return Err(RevError::ShapeMismatch(format!(
            "theta has {} coordinates, problem has {} features",
            theta.len(),
            prob.feature_count()
        )));
    }
    let n = prob.n();
    let mut total = Rational::zero();
    for i in 0..n {
        let mut residual = theta0 - &arena.value(prob.y.cell(0, i))?;
        for (f, theta_f) in theta.iter().enumerate() {
            residual = &residual + &(theta_f * &arena.value(prob.x.cell(f, i))?);
        }
        total = &total + &residual.square();
    }
    Ok(&total / &Rational::from_usize(n))
}

/// Ridge objective: mean squared error plus λ‖θ‖² over the feature
/// coordinates (θ₀ and the bias coordinate are not penalized).
pub fn evaluate_ridge_loss(
    arena: &Arena,
    prob: &RegressionProblem,
    theta: &[Rational],
    theta0: &Rational,
) -> Result<Rational> {
    let mut loss = evaluate_loss(arena, prob, theta, theta0)?;
    for theta_f in theta {
        loss = &loss + &(&prob.lambda * &theta_f.square());
    }
    Ok(loss)
}

/// Exact check of (X·Xᵀ + nλI)·θ = X·Yᵀ at the value level.
pub fn check_normal_equations(
    arena: &Arena,
    prob: &RegressionProblem,
    model: &FittedModel,
) -> Result<bool> {
    let x = prob.x.to_values(arena)?;
    let y = prob.y.to_values(arena)?;
    let theta = model.theta_values(arena)?;
    let mut gram = x.mul(&x.transpose())?;
    if !prob.lambda.is_zero() {
        gram = gram.add_diagonal(&(&Rational::from_usize(prob.n()) * &prob.lambda));
    }
    let theta_col = RatMatrix::from_rows(theta.into_iter().map(|t| vec![t]).collect())?;
    let lhs = gram.mul(&theta_col)?;
    let rhs = x.mul(&y.transpose())?;
    Ok(lhs == rhs)
}

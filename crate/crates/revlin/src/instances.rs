//! Deterministic random problem instances.
//!
//! Entries are small rationals p/q with p in [-9, 9] and q in [1, 9].
//! Everything is driven by a seeded ChaCha stream so the CLI's bench
//! and verify runs (and the test suite) are reproducible bit for bit
//! across machines.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ratmat::RatMatrix;
use crate::rational::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let p = rng.gen_range(-9i64..=9);
    let q = rng.gen_range(1i64..=9);
    Rational::ratio(p, q)
}

fn random_nonzero_rational(rng: &mut ChaCha8Rng) -> Rational {
    let p = *[1i64, -1, 2, -2, 3, -3, 4, 5, -5, 6, 7, -7, 8, 9, -9]
        .get(rng.gen_range(0..15))
        .unwrap();
    let q = rng.gen_range(1i64..=9);
    Rational::ratio(p, q)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            *m.at_mut(i, j) = random_rational(rng);
        }
    }
    m
}

/// Random nonsingular matrix whose leading principal minors are all
/// nonzero, so the no-pivot elimination is guaranteed to succeed.
/// Built as L·U with L unit lower triangular and U upper triangular
/// with nonzero diagonal: the k-th leading minor is then the product
/// of the first k diagonal entries of U.
pub fn random_minor_friendly(rng: &mut ChaCha8Rng, n: usize) -> RatMatrix {
    let mut l = RatMatrix::identity(n);
    let mut u = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            *l.at_mut(i, j) = random_rational(rng);
        }
        *u.at_mut(i, i) = random_nonzero_rational(rng);
        for j in i + 1..n {
            *u.at_mut(i, j) = random_rational(rng);
        }
    }
    let a = l.mul(&u).expect("square dims agree");
    debug_assert!(a.has_nonzero_leading_minors());
    a
}

/// Random regression instance: a full feature matrix X (d rows of
/// features, columns are points, a trailing all-ones row when `bias`
/// is set) and a target vector of length n, rejection-sampled so that
/// X·Xᵀ has nonzero leading principal minors and the no-pivot OLS
/// pipeline goes through.
pub fn random_regression(
    rng: &mut ChaCha8Rng,
    features: usize,
    n: usize,
    bias: bool,
) -> (RatMatrix, Vec<Rational>) {
    let d = features + usize::from(bias);
    assert!(n >= d, "need at least d points for a nonsingular Gram matrix");
    loop {
        let mut x = RatMatrix::zeros(d, n);
        for i in 0..features {
            for j in 0..n {
                *x.at_mut(i, j) = random_rational(rng);
            }
        }
        if bias {
            for j in 0..n {
                *x.at_mut(d - 1, j) = Rational::one();
            }
        }
        let gram = x.mul(&x.transpose()).expect("dims agree");
        if gram.has_nonzero_leading_minors() {
            let y = (0..n).map(|_| random_rational(rng)).collect();
            return (x, y);
        }
    }
}

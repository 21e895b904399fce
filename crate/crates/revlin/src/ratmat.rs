//! Plain value-level rational matrices.
//!
//! This is the irreversible world: ordinary owned matrices used by the
//! oracles, the CLI's text IO, and tests that compare reversible
//! results against directly computed ones. Nothing here touches an
//! arena.
//!
//! Text format (shared with the CLI): one row per line, entries
//! whitespace-separated, each entry in Rational text form.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, RevError};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>, // row-major
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> RatMatrix {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> RatMatrix {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<RatMatrix> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(RevError::ShapeMismatch("matrix must be nonempty".into()));
        }
        let cols = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(RevError::ShapeMismatch(format!(
                "ragged rows: expected {cols} entries, found {}",
                bad.len()
            )));
        }
        Ok(RatMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut out = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &RatMatrix) -> Result<RatMatrix> {
        if self.cols != other.rows {
            return Err(RevError::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rational::zero();
                for k in 0..self.cols {
                    acc = &acc + &(self.at(i, k) * other.at(k, j));
                }
                *out.at_mut(i, j) = acc;
            }
        }
        Ok(out)
    }

    /// Adds `k` to every diagonal entry.
    pub fn add_diagonal(&self, k: &Rational) -> RatMatrix {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            let v = out.at(i, i) + k;
            *out.at_mut(i, i) = v;
        }
        out
    }

    /// True when every leading principal minor is nonzero, i.e. when
    /// elimination without row exchanges meets no zero pivot. Decided
    /// by running exactly that elimination.
    pub fn has_nonzero_leading_minors(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let mut work = self.clone();
        for i in 0..n {
            if work.at(i, i).is_zero() {
                return false;
            }
            for r in i + 1..n {
                let factor = work.at(r, i).checked_div(work.at(i, i)).unwrap();
                for c in i..n {
                    let v = work.at(r, c) - &(&factor * work.at(i, c));
                    *work.at_mut(r, c) = v;
                }
            }
        }
        true
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(Rational::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for RatMatrix {
    type Err = RevError;

    fn from_str(s: &str) -> Result<RatMatrix> {
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for (lineno, line) in s.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<Rational> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<Rational>().map_err(|e| {
                        let detail = match e {
                            RevError::Parse(msg) => msg,
                            other => other.to_string(),
                        };
                        RevError::Parse(format!("line {}: {detail}", lineno + 1))
                    })
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(RevError::Parse("empty matrix text".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(RevError::Parse(
                "rows have differing entry counts".into(),
            ));
        }
        RatMatrix::from_rows(rows)
    }
}

//! Dense Gaussian elimination over a [`Field`].

use std::ops::{Index, IndexMut};

use thiserror::Error;

use super::{Elem, Field};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Row-major dense matrix of field elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![Elem::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Elem::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Elem>>) -> Result<Matrix, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, field: &Field, x: &[Elem]) -> Result<Vec<Elem>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::Dimension(format!(
                "{}-column matrix times {}-vector",
                self.cols,
                x.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(Elem::ZERO, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
            })
            .collect())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Elem;

    fn index(&self, (r, c): (usize, usize)) -> &Elem {
        assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Elem {
        assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Solves the square system `matrix * x = rhs`.
pub fn solve_linear(field: &Field, matrix: &Matrix, rhs: &[Elem]) -> Result<Vec<Elem>, LinalgError> {
    let n = matrix.rows;
    if matrix.cols != n || rhs.len() != n {
        return Err(LinalgError::Dimension(format!(
            "{}x{} system with {} right-hand sides",
            matrix.rows,
            matrix.cols,
            rhs.len()
        )));
    }
    let mut a = matrix.clone();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[(r, col)].is_zero())
            .ok_or(LinalgError::Singular)?;
        a.swap_rows(col, pivot);
        b.swap(col, pivot);
        let inv = field.inv(a[(col, col)]).expect("pivot is nonzero");
        for c in col..n {
            a[(col, c)] = field.mul(a[(col, c)], inv);
        }
        b[col] = field.mul(b[col], inv);
        for r in 0..n {
            let factor = a[(r, col)];
            if r == col || factor.is_zero() {
                continue;
            }
            for c in col..n {
                let t = field.mul(factor, a[(col, c)]);
                a[(r, c)] = field.sub(a[(r, c)], t);
            }
            b[r] = field.sub(b[r], field.mul(factor, b[col]));
        }
    }
    Ok(b)
}

/// Rank of an arbitrary (possibly rectangular) matrix.
pub fn rank(field: &Field, matrix: &Matrix) -> usize {
    let mut a = matrix.clone();
    let mut rank = 0;
    for col in 0..a.cols {
        if rank == a.rows {
            break;
        }
        let Some(pivot) = (rank..a.rows).find(|&r| !a[(r, col)].is_zero()) else {
            continue;
        };
        a.swap_rows(rank, pivot);
        let inv = field.inv(a[(rank, col)]).expect("pivot is nonzero");
        for r in rank + 1..a.rows {
            let factor = field.mul(a[(r, col)], inv);
            if factor.is_zero() {
                continue;
            }
            for c in col..a.cols {
                let t = field.mul(factor, a[(rank, c)]);
                a[(r, c)] = field.sub(a[(r, c)], t);
            }
        }
        rank += 1;
    }
    rank
}

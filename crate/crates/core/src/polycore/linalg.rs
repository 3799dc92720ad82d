//! Dense exact linear algebra over the rationals.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::rational::Rational;

#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QMatrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of reduced row echelon elimination.
pub struct Echelon {
    pub reduced: QMatrix,
    pub pivots: Vec<usize>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::ONE;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Matrix with the given vectors as columns; `nrows` fixes the height when
    /// the list is empty.
    pub fn from_cols(cols: &[Vec<Rational>], nrows: usize) -> Self {
        let mut m = Self::zeros(nrows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), nrows);
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn rows_vec(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let rows: Vec<Vec<Rational>> = (0..self.rows)
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![Rational::ZERO; other.cols];
                for (k, a) in self.row(i).iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    for (j, b) in other.row(k).iter().enumerate() {
                        if !b.is_zero() {
                            acc[j] += a * b;
                        }
                    }
                }
                acc
            })
            .collect();
        if rows.is_empty() {
            return QMatrix::zeros(0, other.cols);
        }
        QMatrix::from_rows(rows)
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn add(&self, other: &QMatrix) -> QMatrix {
        assert!(self.rows == other.rows && self.cols == other.cols);
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &QMatrix) -> QMatrix {
        assert!(self.rows == other.rows && self.cols == other.cols);
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> QMatrix {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    /// Submatrix of the selected columns.
    pub fn select_cols(&self, cols: &[usize]) -> QMatrix {
        let mut m = QMatrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (jj, &j) in cols.iter().enumerate() {
                m[(i, jj)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn select_rows(&self, rows: &[usize]) -> QMatrix {
        QMatrix::from_rows(rows.iter().map(|&i| self.row(i).to_vec()).collect())
    }

    /// Stack vertically.
    pub fn vstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        QMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// Stack horizontally.
    pub fn hstack(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.rows, other.rows);
        let mut m = QMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        m
    }

    /// Reduced row echelon form by Gauss-Jordan elimination.
    pub fn rref(&self) -> Echelon {
        let mut rows = self.rows_vec();
        let pivots = rref_in_place(&mut rows, self.cols);
        let reduced = if rows.is_empty() {
            QMatrix::zeros(0, self.cols)
        } else {
            QMatrix::from_rows(rows)
        };
        Echelon { reduced, pivots }
    }

    pub fn rank(&self) -> usize {
        let mut rows = self.rows_vec();
        forward_eliminate(&mut rows, self.cols).len()
    }

    /// Basis of `{x : A x = 0}`.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let Echelon { reduced, pivots } = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::ZERO; self.cols];
                v[f] = Rational::ONE;
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -&reduced[(r, f)];
                }
                v
            })
            .collect()
    }

    /// Indices of a maximal set of linearly independent columns (greedy, left to right).
    pub fn independent_columns(&self) -> Vec<usize> {
        let mut rows = self.rows_vec();
        forward_eliminate(&mut rows, self.cols)
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let mut rows: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| if i == j { Rational::ONE } else { Rational::ZERO }));
                r
            })
            .collect();
        let pivots = rref_in_place(&mut rows, n);
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
            return None;
        }
        Some(QMatrix::from_rows(rows.into_iter().map(|r| r[n..].to_vec()).collect()))
    }

    /// Solve `A X = B` for square invertible `A`.
    pub fn solve(&self, b: &QMatrix) -> Option<QMatrix> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.rows, self.rows);
        let n = self.rows;
        let mut rows: Vec<Vec<Rational>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend(b.row(i).iter().cloned());
                r
            })
            .collect();
        let pivots = rref_in_place(&mut rows, n);
        if pivots.len() < n {
            return None;
        }
        Some(QMatrix::from_rows(rows.into_iter().map(|r| r[n..].to_vec()).collect()))
    }

    /// Some solution of `A x = b`, or `None` when inconsistent.
    pub fn solve_consistent(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut rows: Vec<Vec<Rational>> = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.push(b[i].clone());
                r
            })
            .collect();
        let pivots = rref_in_place(&mut rows, self.cols);
        for row in rows.iter().skip(pivots.len()) {
            if !row[self.cols].is_zero() {
                return None;
            }
        }
        let mut x = vec![Rational::ZERO; self.cols];
        for (r, &pc) in pivots.iter().enumerate() {
            x[pc] = rows[r][self.cols].clone();
        }
        Some(x)
    }

    /// Solve `A X = B` for `A` with full column rank; `None` if some column
    /// of `B` is outside the range of `A`.
    pub fn solve_columns(&self, b: &QMatrix) -> Option<QMatrix> {
        assert_eq!(b.rows, self.rows);
        let n = self.cols;
        let mut rows: Vec<Vec<Rational>> = (0..self.rows)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend(b.row(i).iter().cloned());
                r
            })
            .collect();
        let pivots = rref_in_place(&mut rows, n);
        if pivots.len() < n {
            return None;
        }
        if rows.iter().skip(n).any(|r| r[n..].iter().any(|x| !x.is_zero())) {
            return None;
        }
        let mut x = QMatrix::zeros(n, b.cols);
        for i in 0..n {
            for j in 0..b.cols {
                x[(i, j)] = rows[i][n + j].clone();
            }
        }
        Some(x)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_f64())
    }
}

fn pick_pivot(rows: &[Vec<Rational>], start: usize, col: usize) -> Option<usize> {
    rows.iter()
        .enumerate()
        .skip(start)
        .filter(|(_, r)| !r[col].is_zero())
        .min_by_key(|(_, r)| r[col].bit_size())
        .map(|(i, _)| i)
}

fn eliminate_below_and_above(rows: &mut [Vec<Rational>], pivot_row: usize, col: usize, all: bool) {
    let piv = rows[pivot_row].clone();
    let work = |(i, row): (usize, &mut Vec<Rational>)| {
        if i == pivot_row || (!all && i < pivot_row) || row[col].is_zero() {
            return;
        }
        let f = row[col].clone();
        for (j, p) in piv.iter().enumerate().skip(col) {
            if !p.is_zero() {
                row[j] -= &f * p;
            }
        }
    };
    if rows.len() * (piv.len() - col) > 4096 {
        rows.par_iter_mut().enumerate().for_each(work);
    } else {
        rows.iter_mut().enumerate().for_each(work);
    }
}

/// Gauss-Jordan elimination over the first `ncols` columns; returns pivot columns.
fn rref_in_place(rows: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = pick_pivot(rows, r, c) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut().skip(c) {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        eliminate_below_and_above(rows, r, c, true);
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Forward elimination only; returns pivot columns.
fn forward_eliminate(rows: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = pick_pivot(rows, r, c) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut().skip(c) {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        eliminate_below_and_above(rows, r, c, false);
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of a list of vectors.
pub fn rank_of(vectors: &[Vec<Rational>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut rows = vectors.to_vec();
    let n = rows[0].len();
    forward_eliminate(&mut rows, n).len()
}

/// Greedy choice of independent vectors (indices into the input).
pub fn independent_subset(vectors: &[Vec<Rational>]) -> Vec<usize> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let n = vectors[0].len();
    QMatrix::from_cols(vectors, n).independent_columns()
}

/// Whether `span(a) == span(b)`.
pub fn same_span(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    let ra = rank_of(a);
    let rb = rank_of(b);
    let mut both = a.to_vec();
    both.extend(b.iter().cloned());
    ra == rb && rank_of(&both) == ra
}

/// Whether `span(a) ⊆ span(b)`.
pub fn span_contains(b: &[Vec<Rational>], a: &[Vec<Rational>]) -> bool {
    let rb = rank_of(b);
    let mut both = b.to_vec();
    both.extend(a.iter().cloned());
    rank_of(&both) == rb
}

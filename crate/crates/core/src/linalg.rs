//! Dense exact matrices over [`Scalar`] and the elimination kernel behind
//! solving, kernels, ranks and Hermitian positivity tests.
//!
//! Storage is dense row-major; all loops skip zero entries, which keeps the
//! diagonal and block-sparse operators produced by the builders cheap.

use std::fmt;

use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Scalar::one();
        }
        m
    }

    pub fn diagonal(entries: &[Scalar]) -> Self {
        let mut m = Matrix::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    /// Builds a matrix from row vectors; every row must have `cols` entries.
    pub fn from_rows(rows: Vec<Vec<Scalar>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::at(
                    format!("row {r}"),
                    format!("expected {cols} entries, found {}", row.len()),
                ));
            }
            data.extend(row);
        }
        Ok(Matrix { rows: n, cols, data })
    }

    /// Integer convenience constructor, mostly for fixtures and tests.
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let data: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Scalar::from_int(x)).collect())
            .collect();
        Matrix::from_rows(data, cols).expect("ragged integer matrix")
    }

    pub fn from_columns(rows: usize, columns: &[Vec<Scalar>]) -> Self {
        let mut m = Matrix::zeros(rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (0..self.cols).all(|c| {
                    let v = &self[(r, c)];
                    if r == c {
                        v.is_one()
                    } else {
                        v.is_zero()
                    }
                })
            })
    }

    pub fn conj_transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = &self[(r, c)];
                if !v.is_zero() {
                    t[(c, r)] = v.conj();
                }
            }
        }
        t
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].clone();
            }
        }
        t
    }

    pub fn scale(&self, k: &Scalar) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "matrix add shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "matrix sub shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = &other[(k, c)];
                    if !b.is_zero() {
                        let prod = a * b;
                        out[(r, c)] += prod;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        let mut out = vec![Scalar::zero(); self.rows];
        for (k, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (r, o) in out.iter_mut().enumerate() {
                let a = &self[(r, k)];
                if !a.is_zero() {
                    *o += a * x;
                }
            }
        }
        out
    }

    /// Reduced row-echelon form and pivot columns. Pivots are taken in
    /// increasing column order; the result is unique.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        self.rref_limited(self.cols)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Canonical null-space basis: one vector per free column (in increasing
    /// order) with a 1 in that coordinate and zeros in the other free ones.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![Scalar::zero(); self.cols];
                v[f] = Scalar::one();
                for (row, &p) in pivots.iter().enumerate() {
                    let e = &r[(row, f)];
                    if !e.is_zero() {
                        v[p] = -e;
                    }
                }
                v
            })
            .collect()
    }

    /// Solves `A·X = B` for all columns of `B` at once. Returns `None` if any
    /// column is inconsistent; free variables are set to zero.
    pub fn solve_matrix(&self, rhs: &Matrix) -> Result<Option<Matrix>> {
        if rhs.rows != self.rows {
            return Err(Error::input(format!(
                "right-hand side has {} rows, system has {}",
                rhs.rows, self.rows
            )));
        }
        let n = self.cols;
        let mut aug = Matrix::zeros(self.rows, n + rhs.cols);
        for r in 0..self.rows {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            for c in 0..rhs.cols {
                aug[(r, n + c)] = rhs[(r, c)].clone();
            }
        }
        // Only eliminate on the coefficient columns.
        let (red, pivots) = aug.rref_limited(n);
        let rank = pivots.len();
        for r in rank..self.rows {
            if (n..n + rhs.cols).any(|c| !red[(r, c)].is_zero()) {
                return Ok(None);
            }
        }
        let mut x = Matrix::zeros(n, rhs.cols);
        for (row, &p) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x[(p, c)] = red[(row, n + c)].clone();
            }
        }
        Ok(Some(x))
    }

    /// Solves `A·x = b`; see [`Matrix::solve_matrix`].
    pub fn solve(&self, b: &[Scalar]) -> Result<Option<Vec<Scalar>>> {
        let rhs = Matrix::from_columns(b.len(), &[b.to_vec()]);
        Ok(self.solve_matrix(&rhs)?.map(|x| x.column(0)))
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let sol = self.solve_matrix(&Matrix::identity(self.rows)).ok()??;
        if self.rank() == self.rows {
            Some(sol)
        } else {
            None
        }
    }

    /// Gauss-Jordan elimination that only pivots on the first `pivot_cols` columns.
    fn rref_limited(&self, pivot_cols: usize) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut prow = 0;
        for col in 0..pivot_cols {
            if prow == m.rows {
                break;
            }
            let Some(sel) = (prow..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(prow, sel);
            let inv = m[(prow, col)].inv().expect("nonzero pivot");
            for c in col..m.cols {
                if !m[(prow, c)].is_zero() {
                    m[(prow, c)] = &m[(prow, c)] * &inv;
                }
            }
            let pivot_row: Vec<(usize, Scalar)> = (col..m.cols)
                .filter(|&c| !m[(prow, c)].is_zero())
                .map(|c| (c, m[(prow, c)].clone()))
                .collect();
            for r in 0..m.rows {
                if r == prow {
                    continue;
                }
                let factor = m[(r, col)].clone();
                if factor.is_zero() {
                    continue;
                }
                for (c, v) in &pivot_row {
                    let delta = &factor * v;
                    m[(r, *c)] -= delta;
                }
            }
            pivots.push(col);
            prow += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// First `(row, col)` where the two matrices differ.
    pub fn first_difference(&self, other: &Matrix) -> Option<(usize, usize)> {
        if self.shape() != other.shape() {
            return Some((0, 0));
        }
        (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .find(|&(r, c)| self[(r, c)] != other[(r, c)])
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (r, c): (usize, usize)) -> &Scalar {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Scalar {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix{}x{}[", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        write!(f, "]")
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for r in 0..self.rows {
            seq.serialize_element(self.row(r))?;
        }
        seq.end()
    }
}

/// Outcome of [`positive_definite_hermitian`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HermitianReport {
    pub hermitian: bool,
    /// Leading principal minors, computed until the first non-positive one.
    pub leading_minors: Vec<Scalar>,
    pub minors_positive: bool,
    pub accepted: bool,
    /// Entry `(row, col)` violating `H = H^†`, if any.
    pub asymmetric_entry: Option<(usize, usize)>,
}

/// Checks `H = H^†` and positivity of every leading principal minor.
pub fn positive_definite_hermitian(h: &Matrix) -> Result<HermitianReport> {
    if !h.is_square() {
        return Err(Error::input(format!(
            "Gram matrix must be square, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    let n = h.rows();
    let asymmetric_entry = h.first_difference(&h.conj_transpose());
    let hermitian = asymmetric_entry.is_none();

    // Gaussian elimination without pivoting: the k-th pivot is the ratio of
    // consecutive leading minors, so minors are running products of pivots.
    let mut m = h.clone();
    let mut minors = Vec::with_capacity(n);
    let mut det = Scalar::one();
    let mut positive = true;
    for k in 0..n {
        let pivot = m[(k, k)].clone();
        det = &det * &pivot;
        minors.push(det.clone());
        if !det.is_positive_real() {
            positive = false;
            break;
        }
        let inv = pivot.inv().expect("positive pivot");
        for r in k + 1..n {
            let factor = &m[(r, k)] * &inv;
            if factor.is_zero() {
                continue;
            }
            for c in k..n {
                let v = &m[(k, c)];
                if !v.is_zero() {
                    let delta = &factor * v;
                    m[(r, c)] -= delta;
                }
            }
        }
    }
    Ok(HermitianReport {
        hermitian,
        leading_minors: minors,
        minors_positive: positive,
        accepted: hermitian && positive,
        asymmetric_entry,
    })
}

pub fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(n: i64) -> Scalar {
        Scalar::from_int(n)
    }

    #[test]
    fn solve_identity() {
        let x = Matrix::identity(2).solve(&[s(1), Scalar::i()]).unwrap().unwrap();
        assert_eq!(x, vec![s(1), Scalar::i()]);
    }

    #[test]
    fn solve_inconsistent() {
        let a = Matrix::from_ints(&[&[1, 1], &[2, 2]]);
        assert_eq!(a.solve(&[s(1), s(3)]).unwrap(), None);
    }

    #[test]
    fn solve_underdetermined_zeroes_free_variable() {
        let a = Matrix::from_ints(&[&[1, 1], &[2, 2]]);
        assert_eq!(a.solve(&[s(1), s(2)]).unwrap(), Some(vec![s(1), s(0)]));
    }

    #[test]
    fn solve_dimension_mismatch() {
        let a = Matrix::identity(2);
        assert!(matches!(a.solve(&[s(1)]), Err(Error::Input { .. })));
    }

    #[test]
    fn kernel_examples() {
        assert!(Matrix::identity(3).kernel_basis().is_empty());
        assert_eq!(
            Matrix::zeros(2, 2).kernel_basis(),
            vec![vec![s(1), s(0)], vec![s(0), s(1)]]
        );
        let a = Matrix::from_rows(vec![vec![s(1), Scalar::i()]], 2).unwrap();
        assert_eq!(a.kernel_basis(), vec![vec![-Scalar::i(), s(1)]]);
    }

    #[test]
    fn hermitian_examples() {
        assert!(positive_definite_hermitian(&Matrix::identity(2)).unwrap().accepted);

        let not_herm = Matrix::from_rows(
            vec![vec![s(1), Scalar::i()], vec![Scalar::i(), s(1)]],
            2,
        )
        .unwrap();
        let rep = positive_definite_hermitian(&not_herm).unwrap();
        assert!(!rep.hermitian && !rep.accepted);
        assert!(rep.asymmetric_entry.is_some());

        let rep = positive_definite_hermitian(&Matrix::from_ints(&[&[1, 0], &[0, -1]])).unwrap();
        assert!(rep.hermitian && !rep.minors_positive && !rep.accepted);
        assert_eq!(rep.leading_minors, vec![s(1), s(-1)]);

        assert!(positive_definite_hermitian(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn inverse_of_gaussian_matrix() {
        let a = Matrix::from_rows(vec![vec![s(1), Scalar::i()], vec![s(0), s(2)]], 2).unwrap();
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert!(Matrix::from_ints(&[&[1, 1], &[1, 1]]).inverse().is_none());
    }

    fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec((-3i64..4, -2i64..3), rows * cols).prop_map(move |v| {
            let data: Vec<Vec<Scalar>> = v
                .chunks(cols)
                .map(|ch| ch.iter().map(|&(a, b)| Scalar::gaussian(a, b)).collect())
                .collect();
            Matrix::from_rows(data, cols).unwrap()
        })
    }

    proptest! {
        #[test]
        fn solve_recovers_consistent_rhs(
            a in arb_matrix(3, 4),
            x in proptest::collection::vec((-3i64..4, -3i64..4), 4),
        ) {
            let x: Vec<Scalar> = x.into_iter().map(|(p, q)| Scalar::gaussian(p, q)).collect();
            let b = a.mul_vec(&x);
            let sol = a.solve(&b).unwrap().expect("consistent system");
            prop_assert_eq!(a.mul_vec(&sol), b);
        }

        #[test]
        fn kernel_basis_is_exact(a in arb_matrix(3, 5)) {
            let basis = a.kernel_basis();
            prop_assert_eq!(basis.len(), a.cols() - a.rank());
            for v in &basis {
                prop_assert!(a.mul_vec(v).iter().all(Scalar::is_zero));
            }
            if !basis.is_empty() {
                let stacked = Matrix::from_columns(a.cols(), &basis);
                prop_assert_eq!(stacked.rank(), basis.len());
            }
        }
    }
}

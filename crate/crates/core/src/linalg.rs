//! Dense exact linear algebra over the integers and the rationals.
//!
//! Every other module builds on the kernels here: column-style Hermite normal
//! form, fraction-free rank, rational and integer kernels, exact inversion and
//! the induced matrix norms. Nothing in this module rounds.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Dense row-major matrix with fixed dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<BigInt>;
pub type RatMatrix = Matrix<BigRational>;

impl<T: Clone> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row vectors. An empty list yields a 0x0 matrix.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self {
            rows: nrows,
            cols,
            data,
        })
    }

    /// Builds a `rows x columns.len()` matrix from column vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Result<Self> {
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != rows) {
            return Err(Error::DimensionMismatch(format!(
                "column {j} has {} entries, expected {rows}",
                c.len()
            )));
        }
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for c in columns {
                data.push(c[i].clone());
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        (i < self.rows && j < self.cols).then(|| &self.data[i * self.cols + j])
    }

    pub fn row(&self, i: usize) -> &[T] {
        assert!(i < self.rows, "row {i} out of bounds ({} rows)", self.rows);
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        assert!(
            j < self.cols,
            "column {j} out of bounds ({} cols)",
            self.cols
        );
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].clone());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn select_columns(&self, indices: &[usize]) -> Self {
        let columns: Vec<Vec<T>> = indices.iter().map(|&j| self.column(j)).collect();
        Self::from_columns(self.rows, &columns).expect("columns share the row count")
    }

    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let rows: Vec<Vec<T>> = indices.iter().map(|&i| self.row(i).to_vec()).collect();
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for r in rows {
            data.extend(r);
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] = out[(i, j)].clone() + prod;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds for {}x{}",
            self.rows,
            self.cols
        );
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds for {}x{}",
            self.rows,
            self.cols
        );
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    /// Convenience constructor for tests and fixtures.
    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn to_rational(&self) -> RatMatrix {
        self.map(|x| BigRational::from_integer(x.clone()))
    }

    /// Induced infinity norm: maximum absolute row sum.
    pub fn infinity_norm(&self) -> BigInt {
        (0..self.rows)
            .map(|i| l1_norm(self.row(i)))
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Induced 1-norm: maximum absolute column sum.
    pub fn one_norm(&self) -> BigInt {
        (0..self.cols)
            .map(|j| l1_norm(&self.column(j)))
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero_column(&self, j: usize) -> bool {
        (0..self.rows).all(|i| self[(i, j)].is_zero())
    }
}

impl RatMatrix {
    pub fn infinity_norm(&self) -> BigRational {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .fold(BigRational::zero(), |acc, x| acc + x.abs())
            })
            .max()
            .unwrap_or_else(BigRational::zero)
    }

    /// Scales each row by the lcm of its denominators.
    pub fn integerize_rows(&self) -> IntMatrix {
        let rows = (0..self.rows)
            .map(|i| clear_denominators(self.row(i)).0)
            .collect::<Vec<_>>();
        let mut data = Vec::with_capacity(self.rows * self.cols);
        for r in rows {
            data.extend(r);
        }
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

pub fn dot<T>(a: &[T], b: &[T]) -> T
where
    T: Clone + Zero,
    for<'x> &'x T: Mul<&'x T, Output = T>,
{
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x * y)
}

pub fn inf_norm(v: &[BigInt]) -> BigInt {
    v.iter().map(BigInt::abs).max().unwrap_or_else(BigInt::zero)
}

pub fn l1_norm(v: &[BigInt]) -> BigInt {
    v.iter().map(BigInt::abs).sum()
}

pub fn rat_inf_norm(v: &[BigRational]) -> BigRational {
    v.iter()
        .map(BigRational::abs)
        .max()
        .unwrap_or_else(BigRational::zero)
}

pub fn to_rational_vec(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().cloned().map(BigRational::from_integer).collect()
}

/// Multiplies `v` by the lcm of its denominators; returns the integer vector
/// together with that multiplier.
pub fn clear_denominators(v: &[BigRational]) -> (Vec<BigInt>, BigInt) {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    (ints, lcm)
}

/// Divides by the gcd of the entries. The zero vector is returned unchanged.
pub fn primitive_part(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Flips the sign so the first nonzero entry is positive.
fn orient(mut v: Vec<BigInt>) -> Vec<BigInt> {
    if v.iter()
        .find(|x| !x.is_zero())
        .is_some_and(Signed::is_negative)
    {
        for x in &mut v {
            *x = -&*x;
        }
    }
    v
}

/// Column-style Hermite normal form `H = M U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermiteForm {
    pub h: IntMatrix,
    /// Unimodular transform.
    pub u: IntMatrix,
    /// Number of nonzero columns of `h`; they come first.
    pub rank: usize,
}

/// Replaces columns `(p, q)` by `(a p + b q, c p + d q)`.
fn combine_columns(
    cols: &mut [Vec<BigInt>],
    p: usize,
    q: usize,
    a: &BigInt,
    b: &BigInt,
    c: &BigInt,
    d: &BigInt,
) {
    let (lo, hi) = cols.split_at_mut(q.max(p));
    let (cp, cq) = if p < q {
        (&mut lo[p], &mut hi[0])
    } else {
        (&mut hi[0], &mut lo[q])
    };
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let nx = a * &*x + b * &*y;
        let ny = c * &*x + d * &*y;
        *x = nx;
        *y = ny;
    }
}

fn sub_multiple(cols: &mut [Vec<BigInt>], target: usize, source: usize, factor: &BigInt) {
    let src = cols[source].clone();
    for (x, s) in cols[target].iter_mut().zip(&src) {
        *x -= factor * s;
    }
}

/// Column-style Hermite normal form.
///
/// Pivots are positive, lie in strictly increasing rows, and every entry to
/// the left of a pivot in its row is reduced into `[0, pivot)`. Earlier
/// columns are reduced after each pivot so entries stay small.
pub fn hnf(m: &IntMatrix) -> HermiteForm {
    let (rows, n) = (m.rows(), m.cols());
    let mut hc = m.columns();
    let mut uc = IntMatrix::identity(n).columns();
    let mut piv = 0;
    for i in 0..rows {
        if piv == n {
            break;
        }
        for j in piv + 1..n {
            if hc[j][i].is_zero() {
                continue;
            }
            if hc[piv][i].is_zero() {
                hc.swap(piv, j);
                uc.swap(piv, j);
                continue;
            }
            let a = hc[piv][i].clone();
            let b = hc[j][i].clone();
            let eg = a.extended_gcd(&b);
            let (mut g, mut x, mut y) = (eg.gcd, eg.x, eg.y);
            if g.is_negative() {
                g = -g;
                x = -x;
                y = -y;
            }
            let c = -(&b / &g);
            let d = &a / &g;
            combine_columns(&mut hc, piv, j, &x, &y, &c, &d);
            combine_columns(&mut uc, piv, j, &x, &y, &c, &d);
        }
        if hc[piv][i].is_zero() {
            continue;
        }
        if hc[piv][i].is_negative() {
            for x in hc[piv].iter_mut().chain(uc[piv].iter_mut()) {
                *x = -&*x;
            }
        }
        let p = hc[piv][i].clone();
        for j in 0..piv {
            let f = hc[j][i].div_floor(&p);
            if !f.is_zero() {
                sub_multiple(&mut hc, j, piv, &f);
                sub_multiple(&mut uc, j, piv, &f);
            }
        }
        piv += 1;
    }
    HermiteForm {
        h: IntMatrix::from_columns(rows, &hc).expect("shape preserved"),
        u: IntMatrix::from_columns(n, &uc).expect("shape preserved"),
        rank: piv,
    }
}

/// Basis of the integer kernel `{x in Z^n : M x = 0}`, one column per vector.
pub fn integer_kernel_basis(m: &IntMatrix) -> IntMatrix {
    let form = hnf(m);
    let idx: Vec<usize> = (form.rank..m.cols()).collect();
    form.u.select_columns(&idx)
}

/// Fraction-free (Bareiss) rank of an integer matrix.
pub fn rank_int(m: &IntMatrix) -> usize {
    let mut a = m.to_rows();
    let (rows, cols) = (m.rows(), m.cols());
    let mut r = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for j in c + 1..cols {
                let v = &a[r][c] * &a[i][j] - &a[i][c] * &a[r][j];
                a[i][j] = v / &prev;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

pub fn rank(m: &RatMatrix) -> usize {
    rank_int(&m.integerize_rows())
}

/// Reduced row echelon form and the pivot columns.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = (m.rows(), m.cols());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                let tmp = a[(r, j)].clone();
                a[(r, j)] = a[(p, j)].clone();
                a[(p, j)] = tmp;
            }
        }
        let inv = a[(r, c)].recip();
        for j in c..cols {
            a[(r, j)] = &a[(r, j)] * &inv;
        }
        for i in 0..rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..cols {
                let v = &a[(r, j)] * &f;
                a[(i, j)] -= v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Basis of `{y : M y = 0}` as integer columns with content 1 and a positive
/// leading entry. A full column rank `M` yields a matrix with zero columns.
pub fn rational_kernel_basis(m: &RatMatrix) -> IntMatrix {
    let (r, pivots) = rref(m);
    let n = m.cols();
    let mut basis = Vec::new();
    for f in (0..n).filter(|c| !pivots.contains(c)) {
        let mut v = vec![BigRational::zero(); n];
        v[f] = BigRational::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -r[(i, f)].clone();
        }
        basis.push(orient(primitive_part(&clear_denominators(&v).0)));
    }
    IntMatrix::from_columns(n, &basis).expect("kernel vectors have length n")
}

pub fn invert_rational(m: &RatMatrix) -> Result<RatMatrix> {
    if m.rows() != m.cols() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut aug = RatMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)].clone();
        }
        aug[(i, n + i)] = BigRational::one();
    }
    let (red, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return Err(Error::SingularMatrix);
    }
    let mut inv = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] = red[(i, n + j)].clone();
        }
    }
    Ok(inv)
}

/// Exact inverse of a nonsingular integer matrix.
pub fn invert(m: &IntMatrix) -> Result<RatMatrix> {
    invert_rational(&m.to_rational())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn hnf_small_square() {
        let form = hnf(&int(&[&[1, 2], &[2, 1]]));
        assert_eq!(form.h, int(&[&[1, 0], &[2, 3]]));
        assert_eq!(form.rank, 2);
        assert_eq!(int(&[&[1, 2], &[2, 1]]).matmul(&form.u).unwrap(), form.h);
    }

    #[test]
    fn hnf_identity_and_row() {
        let id = IntMatrix::identity(3);
        let form = hnf(&id);
        assert_eq!(form.h, id);
        assert_eq!(form.u, id);

        let form = hnf(&int(&[&[2, 4]]));
        assert_eq!(form.h, int(&[&[2, 0]]));
        assert_eq!(form.rank, 1);
    }

    #[test]
    fn hnf_zero_matrix() {
        let form = hnf(&IntMatrix::zeros(2, 3));
        assert_eq!(form.rank, 0);
        assert_eq!(form.h, IntMatrix::zeros(2, 3));
    }

    #[test]
    fn hnf_handles_no_rows() {
        let m = IntMatrix::zeros(0, 3);
        let form = hnf(&m);
        assert_eq!(form.rank, 0);
        assert_eq!(form.u, IntMatrix::identity(3));
    }

    #[test]
    fn kernel_of_single_row() {
        let k = rational_kernel_basis(&int(&[&[1, 1]]).to_rational());
        assert_eq!(k, int(&[&[1], &[-1]]));
    }

    #[test]
    fn kernel_of_lambda_row() {
        let m = RatMatrix::from_rows(vec![vec![rat(1, 1), rat(1, 3)]]).unwrap();
        assert_eq!(rational_kernel_basis(&m), int(&[&[1], &[-3]]));
    }

    #[test]
    fn kernel_of_invertible_is_empty() {
        let k = rational_kernel_basis(&int(&[&[1, 2], &[2, 1]]).to_rational());
        assert_eq!(k.cols(), 0);
        assert_eq!(k.rows(), 2);
    }

    #[test]
    fn integer_kernel_is_saturated() {
        // 2x - 2y = 0 has integer kernel generated by (1, 1), not (2, 2).
        let k = integer_kernel_basis(&int(&[&[2, -2]]));
        assert_eq!(k.cols(), 1);
        let v = orient(k.column(0));
        assert_eq!(v, vec![BigInt::from(1), BigInt::from(1)]);
    }

    #[test]
    fn invert_examples() {
        let inv = invert(&int(&[&[1, 0], &[2, 3]])).unwrap();
        let expected = RatMatrix::from_rows(vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(-2, 3), rat(1, 3)],
        ])
        .unwrap();
        assert_eq!(inv, expected);
        assert_eq!(
            invert(&IntMatrix::identity(2)).unwrap(),
            RatMatrix::identity(2)
        );
        assert_eq!(
            invert(&int(&[&[1, 1], &[1, 1]])),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&RatMatrix::identity(3)), 3);
        assert_eq!(rank(&int(&[&[1, 2], &[2, 4]]).to_rational()), 1);
        assert_eq!(rank(&int(&[&[1, 2], &[2, 1]]).to_rational()), 2);
        assert_eq!(rank_int(&int(&[&[0, 0, 1], &[0, 0, 2], &[1, 1, 0]])), 2);
    }

    #[test]
    fn norms() {
        let m = int(&[&[1, 2], &[2, 1]]);
        assert_eq!(m.infinity_norm(), BigInt::from(3));
        let m = int(&[&[1, 0, 0], &[1, 1, 0], &[1, 0, 1]]);
        assert_eq!(m.infinity_norm(), BigInt::from(2));
        assert_eq!(m.one_norm(), BigInt::from(3));
    }

    #[test]
    fn ragged_rows_rejected() {
        let r = IntMatrix::from_i64_rows(&[&[1, 2], &[3]]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }
}

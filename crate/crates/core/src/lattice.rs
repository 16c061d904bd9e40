//! Lattices generated by the columns of an integer matrix.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    self, integer_kernel_basis, invert, rational_kernel_basis, IntMatrix, RatMatrix,
};

/// Nonsingular square basis of `L(A)` with its exact inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBasis {
    basis: IntMatrix,
    inverse: RatMatrix,
}

impl LatticeBasis {
    pub fn new(basis: IntMatrix) -> Result<Self> {
        let inverse = invert(&basis)?;
        Ok(Self { basis, inverse })
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn inverse(&self) -> &RatMatrix {
        &self.inverse
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    /// Rational coordinates `B^{-1} v`.
    pub fn coordinates(&self, v: &[BigInt]) -> Result<Vec<BigRational>> {
        self.inverse.mul_vec(&linalg::to_rational_vec(v))
    }
}

/// Box `{B y : ||y||_inf <= M}` in a lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedLatticeSpec {
    pub basis: LatticeBasis,
    pub bound: BigInt,
}

/// Basis of `L(A)` taken from the nonzero columns of the Hermite form.
pub fn lattice_basis(a: &IntMatrix) -> Result<LatticeBasis> {
    let form = linalg::hnf(a);
    if form.rank < a.rows() {
        return Err(Error::RankDeficient {
            rank: form.rank,
            rows: a.rows(),
        });
    }
    let idx: Vec<usize> = (0..a.rows()).collect();
    LatticeBasis::new(form.h.select_columns(&idx))
}

/// Tests `b in L(A)`. Returns the integral coordinates `B^{-1} b` when it is.
pub fn member(basis: &LatticeBasis, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    let coords = basis.coordinates(b)?;
    if coords.iter().all(BigRational::is_integer) {
        Ok(Some(coords.into_iter().map(|c| c.to_integer()).collect()))
    } else {
        Ok(None)
    }
}

/// `M = ceil(||B^{-1} A||_inf * ||u||_inf)`, at least 1, so that
/// `||B^{-1} A x||_inf <= M` on the box `0 <= x <= u`.
pub fn bounded_image_bound(a: &IntMatrix, basis: &LatticeBasis, u: &[BigInt]) -> Result<BigInt> {
    if u.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "bound vector has length {}, expected {}",
            u.len(),
            a.cols()
        )));
    }
    let reduced = basis.inverse().matmul(&a.to_rational())?;
    let raw = reduced.infinity_norm() * BigRational::from_integer(linalg::inf_norm(u));
    Ok(raw.ceil().to_integer().max(BigInt::one()))
}

/// Basis of the lattice `L(B) ∩ R` where `R` is spanned by the columns of
/// `subspace`.
///
/// The integer coordinate vectors `y` with `B y ∈ R` are the integer kernel of
/// `P B`, where the rows of `P` span the orthogonal complement of `R`. That
/// kernel is read off the unimodular transform of a Hermite form, so it is
/// saturated, and the result is its image under `B`, put in Hermite form.
pub fn lattice_subspace_intersection(
    basis: &LatticeBasis,
    subspace: &RatMatrix,
) -> Result<IntMatrix> {
    let m = basis.dim();
    if subspace.rows() != m {
        return Err(Error::DimensionMismatch(format!(
            "subspace vectors have length {}, expected {m}",
            subspace.rows()
        )));
    }
    let r = linalg::rank(subspace);
    let complement = rational_kernel_basis(&subspace.transpose()).transpose();
    let constraint = complement.matmul(basis.basis())?;
    let coords = integer_kernel_basis(&constraint);
    debug_assert_eq!(coords.cols(), r);
    let generators = basis.basis().matmul(&coords)?;
    let form = linalg::hnf(&generators);
    let idx: Vec<usize> = (0..form.rank).collect();
    Ok(form.h.select_columns(&idx))
}

/// Whether `v` is an integer combination of the columns of `gens`
/// (full column rank assumed).
pub fn in_lattice_span(gens: &IntMatrix, v: &[BigInt]) -> bool {
    let k = gens.cols();
    let mut aug_cols = gens.columns();
    aug_cols.push(v.to_vec());
    let aug = IntMatrix::from_columns(gens.rows(), &aug_cols).expect("same row count");
    let ker = integer_kernel_basis(&aug);
    // v lies in the lattice iff some integer kernel vector has last entry ±1;
    // the gcd of last entries over a kernel basis decides it.
    let g = (0..ker.cols()).fold(BigInt::zero(), |acc, j| acc.gcd(&ker[(k, j)]));
    g.is_one()
}

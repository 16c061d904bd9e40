//! Geometry of the cone `C(A) = {A x : x >= 0}`: lineality, pointedness and
//! separating vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, IntMatrix};
pub use crate::lp::{lp_feasible, Feasibility, LinearSystem, Relation};

/// Split of the columns of `A` into those lying in the lineality subspace
/// `R = C(A) ∩ -C(A)` and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeDecomposition {
    /// Dimension of `R`.
    pub r: usize,
    /// `m x r` integer basis of `R`, chosen among the lineal columns.
    pub lineality_basis: IntMatrix,
    pub lineal_cols: Vec<usize>,
    pub pointed_cols: Vec<usize>,
    pub lineal_part: IntMatrix,
    pub pointed_part: IntMatrix,
}

impl ConeDecomposition {
    pub fn is_pointed(&self) -> bool {
        self.r == 0
    }
}

/// A nonnegative `x` with `A x = target`, if one exists.
pub fn cone_preimage(a: &IntMatrix, target: &[BigRational]) -> Result<Option<Vec<BigRational>>> {
    if target.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "target has length {}, expected {}",
            target.len(),
            a.rows()
        )));
    }
    let mut sys = LinearSystem::new(a.cols());
    sys.add_int_rows(&a.to_rows(), Relation::Eq, target)?;
    Ok(lp_feasible(&sys).witness())
}

/// Column `j` is lineal iff `-A_j ∈ C(A)`.
pub fn decompose_cone(a: &IntMatrix) -> Result<ConeDecomposition> {
    let mut lineal_cols = Vec::new();
    let mut pointed_cols = Vec::new();
    for j in 0..a.cols() {
        let neg: Vec<BigRational> = a
            .column(j)
            .into_iter()
            .map(|x| BigRational::from_integer(-x))
            .collect();
        if cone_preimage(a, &neg)?.is_some() {
            lineal_cols.push(j);
        } else {
            pointed_cols.push(j);
        }
    }
    let mut basis_cols: Vec<Vec<BigInt>> = Vec::new();
    for &j in &lineal_cols {
        let mut trial = basis_cols.clone();
        trial.push(a.column(j));
        let t = IntMatrix::from_columns(a.rows(), &trial)?;
        if linalg::rank_int(&t) == trial.len() {
            basis_cols = trial;
        }
    }
    Ok(ConeDecomposition {
        r: basis_cols.len(),
        lineality_basis: IntMatrix::from_columns(a.rows(), &basis_cols)?,
        lineal_part: a.select_columns(&lineal_cols),
        pointed_part: a.select_columns(&pointed_cols),
        lineal_cols,
        pointed_cols,
    })
}

/// Integer `h` with `h^T M_j >= margin` for every column `M_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatingVector {
    pub h: Vec<BigInt>,
    /// `min_j h^T M_j`.
    pub margin: BigRational,
}

/// The margin a separating vector must reach: `max(||M||_inf, ||M||_1) + 1`.
///
/// The row-sum norm is what keeps `h^T M >= ||M||_inf + 1`; the column-sum
/// norm is what makes `(h + eta)^T M_j >= 1` for every `||eta||_inf <= 1`,
/// since `|eta^T M_j| <= sum_i |M_ij|`.
pub fn required_margin(m: &IntMatrix) -> BigInt {
    m.infinity_norm().max(m.one_norm()) + BigInt::one()
}

/// Integer `h` with `h^T M_j >= required_margin(M)` for all columns.
///
/// Solves `h^T M_j >= 1` exactly, clears denominators, divides out the
/// content and rescales by the smallest integer reaching the margin.
pub fn separating_vector(m: &IntMatrix) -> Result<SeparatingVector> {
    let dim = m.rows();
    if m.cols() == 0 {
        return Ok(SeparatingVector {
            h: vec![BigInt::zero(); dim],
            margin: BigRational::zero(),
        });
    }
    let mut sys = LinearSystem::new(dim);
    for v in 0..dim {
        sys.set_free(v);
    }
    let ones = vec![BigRational::one(); m.cols()];
    sys.add_int_rows(&m.transpose().to_rows(), Relation::Ge, &ones)?;
    let witness = lp_feasible(&sys).witness().ok_or(Error::NotPointed)?;
    let prim = linalg::primitive_part(&linalg::clear_denominators(&witness).0);
    let tm = m.transpose();
    let min_dot = (0..m.cols())
        .map(|j| linalg::dot(tm.row(j), &prim))
        .min()
        .expect("at least one column");
    debug_assert!(min_dot.is_positive());
    let target = required_margin(m);
    let scale = Integer::div_ceil(&target, &min_dot);
    let h: Vec<BigInt> = prim.iter().map(|x| x * &scale).collect();
    Ok(SeparatingVector {
        margin: BigRational::from_integer(min_dot * scale),
        h,
    })
}

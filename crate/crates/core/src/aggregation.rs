//! Aggregation matrices `T` replacing `A x = b, x >= 0 integral` by
//! `T A x = T b` with the same solutions (strong) or the same feasibility
//! (weak).
//!
//! Every strong construction follows one pattern: find a subspace whose
//! intersection with the relevant shifted set is bounded by some `M`, then
//! perturb it with reciprocals of pairwise-coprime moduli above `M`, so that an
//! integer point of the intersection must have every coordinate divisible by
//! a modulus larger than its absolute value, hence zero.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::cone::{cone_preimage, decompose_cone, separating_vector};
use crate::coprime::coprime_above;
use crate::error::{Error, Result};
use crate::lattice::{bounded_image_bound, lattice_basis, lattice_subspace_intersection, member};
use crate::linalg::{self, inf_norm, l1_norm, IntMatrix, RatMatrix};

/// `A x = b` over nonnegative integers, optionally with `x <= u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiophantineSystem {
    a: IntMatrix,
    b: Vec<BigInt>,
    u: Option<Vec<BigInt>>,
}

impl DiophantineSystem {
    /// Checks shapes, `u >= 0` and `rank(A) = m`.
    pub fn new(a: IntMatrix, b: Vec<BigInt>, u: Option<Vec<BigInt>>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                a.rows()
            )));
        }
        if let Some(u) = &u {
            if u.len() != a.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "bound vector has length {}, expected {}",
                    u.len(),
                    a.cols()
                )));
            }
            if u.iter().any(Signed::is_negative) {
                return Err(Error::InvalidSystem(
                    "upper bounds must be nonnegative".into(),
                ));
            }
        }
        if a.rows() == 0 {
            return Err(Error::InvalidSystem("system has no equations".into()));
        }
        let rank = linalg::rank_int(&a);
        if rank < a.rows() {
            return Err(Error::RankDeficient {
                rank,
                rows: a.rows(),
            });
        }
        Ok(Self { a, b, u })
    }

    pub fn from_i64(a: &[&[i64]], b: &[i64], u: Option<&[i64]>) -> Result<Self> {
        let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        Self::new(IntMatrix::from_i64_rows(a)?, big(b), u.map(big))
    }

    pub fn a(&self) -> &IntMatrix {
        &self.a
    }

    pub fn b(&self) -> &[BigInt] {
        &self.b
    }

    pub fn upper_bounds(&self) -> Option<&[BigInt]> {
        self.u.as_deref()
    }

    pub fn rows(&self) -> usize {
        self.a.rows()
    }

    pub fn cols(&self) -> usize {
        self.a.cols()
    }

    pub fn with_bounds(&self, u: Vec<BigInt>) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), Some(u))
    }

    pub fn without_bounds(&self) -> Self {
        Self {
            u: None,
            ..self.clone()
        }
    }

    pub fn is_solution(&self, x: &[BigInt]) -> bool {
        x.len() == self.cols()
            && x.iter().all(|v| !v.is_negative())
            && self
                .u
                .as_ref()
                .is_none_or(|u| x.iter().zip(u).all(|(v, ub)| v <= ub))
            && self.a.mul_vec(x).is_ok_and(|ax| ax == self.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationKind {
    Strong,
    Weak,
}

/// Intermediate quantities a construction used, kept for reports.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Provenance {
    /// Pairwise-coprime moduli `q_i`.
    pub moduli: Vec<BigInt>,
    /// Separating vectors `h_l`, one per row for the cone-based constructions.
    pub separating: Vec<Vec<BigInt>>,
    /// Bound `M` on the coordinates of the shifted set.
    pub bound: Option<BigInt>,
    /// Threshold `C` the moduli exceed, when it differs from `M`.
    pub threshold: Option<BigInt>,
    /// Lineality dimension `r`.
    pub lineality_dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregationMatrix {
    t: RatMatrix,
    kind: AggregationKind,
    introduced_bounds: Option<Vec<BigInt>>,
    provenance: Provenance,
}

impl AggregationMatrix {
    pub fn new(
        t: RatMatrix,
        kind: AggregationKind,
        introduced_bounds: Option<Vec<BigInt>>,
        provenance: Provenance,
    ) -> Self {
        Self {
            t,
            kind,
            introduced_bounds,
            provenance,
        }
    }

    /// Wraps a user-supplied `T` with empty provenance.
    pub fn from_matrix(t: RatMatrix) -> Self {
        Self::new(t, AggregationKind::Strong, None, Provenance::default())
    }

    pub fn t(&self) -> &RatMatrix {
        &self.t
    }

    pub fn size(&self) -> usize {
        self.t.rows()
    }

    pub fn kind(&self) -> AggregationKind {
        self.kind
    }

    pub fn introduced_bounds(&self) -> Option<&[BigInt]> {
        self.introduced_bounds.as_deref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// First `k` rows of `T`.
    pub fn truncated(&self, k: usize) -> RatMatrix {
        let idx: Vec<usize> = (0..k.min(self.size())).collect();
        self.t.select_rows(&idx)
    }

    /// The aggregated system `(T A, T b)`.
    pub fn apply(&self, sys: &DiophantineSystem) -> Result<(RatMatrix, Vec<BigRational>)> {
        let ta = self.t.matmul(&sys.a().to_rational())?;
        let tb = self.t.mul_vec(&linalg::to_rational_vec(sys.b()))?;
        Ok((ta, tb))
    }
}

fn reciprocals(moduli: &[BigInt]) -> Vec<BigRational> {
    moduli
        .iter()
        .map(|q| BigRational::new(BigInt::one(), q.clone()))
        .collect()
}

fn require_bounds(sys: &DiophantineSystem) -> Result<&[BigInt]> {
    sys.upper_bounds()
        .ok_or_else(|| Error::InvalidSystem("upper bounds are required".into()))
}

fn single_row(entries: Vec<BigRational>) -> RatMatrix {
    RatMatrix::from_rows(vec![entries]).expect("one row")
}

/// Size-one strong aggregation of a bounded system.
///
/// With `B` a basis of `L(A)` and `beta = B^{-1} b`, every coordinate of
/// `B^{-1}(A x - b)` on the box is below `C = M + ||beta||_inf + 1`. The rows
/// `B_i + B_m / q_i` (`i < m`) with coprime `q_i > C` span a hyperplane
/// meeting that set only at zero; `T` is its normal, scaled so the last
/// entry is `-1`.
pub fn aggregate_bounded(sys: &DiophantineSystem) -> Result<AggregationMatrix> {
    let u = require_bounds(sys)?;
    let a = sys.a();
    let m = sys.rows();
    let basis = lattice_basis(a)?;
    let beta = member(&basis, sys.b())?.ok_or(Error::InfeasibleByLattice)?;
    let big_m = bounded_image_bound(a, &basis, u)?;
    let c = &big_m + inf_norm(&beta) + BigInt::one();
    if m == 1 {
        let provenance = Provenance {
            bound: Some(big_m),
            threshold: Some(c),
            ..Provenance::default()
        };
        return Ok(AggregationMatrix::new(
            RatMatrix::identity(1),
            AggregationKind::Strong,
            None,
            provenance,
        ));
    }
    let set = coprime_above(m - 1, &c);
    let b = basis.basis();
    let last = b.column(m - 1);
    let lambda_rows: Vec<Vec<BigRational>> = set
        .moduli
        .iter()
        .enumerate()
        .map(|(i, q)| {
            b.column(i)
                .into_iter()
                .zip(&last)
                .map(|(bi, bm)| BigRational::new(bi * q + bm, q.clone()))
                .collect()
        })
        .collect();
    let lambda = RatMatrix::from_rows(lambda_rows)?;
    let kernel = linalg::rational_kernel_basis(&lambda);
    debug_assert_eq!(kernel.cols(), 1);
    let t = kernel.column(0);
    let pivot = t
        .iter()
        .rev()
        .find(|x| !x.is_zero())
        .expect("kernel vector is nonzero")
        .clone();
    let t: Vec<BigRational> = t
        .into_iter()
        .map(|x| BigRational::new(-x, pivot.clone()))
        .collect();
    Ok(AggregationMatrix::new(
        single_row(t),
        AggregationKind::Strong,
        None,
        Provenance {
            moduli: set.moduli,
            bound: Some(big_m),
            threshold: Some(c),
            ..Provenance::default()
        },
    ))
}

/// Size-one strong aggregation `T = (1/q_1, ..., 1/q_{m-1}, -1)` of a bounded
/// system, with coprime `q_i > ||A||_inf ||u||_inf + ||b||_inf`.
pub fn aggregate_bounded_explicit(sys: &DiophantineSystem) -> Result<AggregationMatrix> {
    let u = require_bounds(sys)?;
    let m = sys.rows();
    let image_bound = sys.a().infinity_norm() * inf_norm(u);
    let threshold = (&image_bound + inf_norm(sys.b())).max(BigInt::one());
    let set = coprime_above(m - 1, &threshold);
    let mut row = reciprocals(&set.moduli);
    row.push(-BigRational::one());
    Ok(AggregationMatrix::new(
        single_row(row),
        AggregationKind::Strong,
        None,
        Provenance {
            moduli: set.moduli,
            bound: Some(image_bound),
            threshold: Some(threshold),
            ..Provenance::default()
        },
    ))
}

/// Size-one strong aggregation `T = h^T + (1/q_1, ..., 1/q_m)` when `C(A)` is
/// pointed.
pub fn aggregate_pointed(sys: &DiophantineSystem) -> Result<AggregationMatrix> {
    let a = sys.a();
    let sep = separating_vector(a)?;
    let big_m = pointed_bound(a, &sep.h, sys.b());
    let set = coprime_above(sys.rows(), &big_m);
    let row: Vec<BigRational> = sep
        .h
        .iter()
        .zip(reciprocals(&set.moduli))
        .map(|(h, e)| BigRational::from_integer(h.clone()) + e)
        .collect();
    Ok(AggregationMatrix::new(
        single_row(row),
        AggregationKind::Strong,
        None,
        Provenance {
            moduli: set.moduli,
            separating: vec![sep.h],
            bound: Some(big_m),
            threshold: None,
            lineality_dim: Some(0),
        },
    ))
}

/// `M = ||A||_inf (||h||_inf + 1) ||b||_1 + ||b||_inf`.
fn pointed_bound(a: &IntMatrix, h: &[BigInt], b: &[BigInt]) -> BigInt {
    a.infinity_norm() * (inf_norm(h) + BigInt::one()) * l1_norm(b) + inf_norm(b)
}

/// Per-coordinate bound `(||h||_inf + 1) ||b||_1` on every solution of either
/// the original or the aggregated system produced by [`aggregate_pointed`].
pub fn pointed_window(sys: &DiophantineSystem, agg: &AggregationMatrix) -> Option<Vec<BigInt>> {
    let h = agg.provenance().separating.first()?;
    if agg.size() != 1 || agg.provenance().lineality_dim != Some(0) {
        return None;
    }
    let w = (inf_norm(h) + BigInt::one()) * l1_norm(sys.b());
    Some(vec![w; sys.cols()])
}

/// Strong aggregation of size `r + 1`, `r` the lineality dimension of `C(A)`.
///
/// The lineal columns are replaced by a basis `B_1..B_r` of `L(A) ∩ R` plus
/// `B_{r+1} = -sum B_i`. Dropping any one `B_l` leaves a pointed cone with
/// separating vector `h_l`; the rows of `T` are `h_1 + eta, h_2, ..., h_{r+1}`
/// with `eta = (1/q_i)` and coprime `q_i` above the bound on the intersection.
pub fn aggregate_general(sys: &DiophantineSystem) -> Result<AggregationMatrix> {
    let a = sys.a();
    let m = sys.rows();
    let decomposition = decompose_cone(a)?;
    let r = decomposition.r;
    if r == 0 {
        return aggregate_pointed(sys);
    }
    if r + 1 > m {
        return Err(Error::UnsupportedRegime(format!(
            "lineality dimension {r} leaves no room for {} independent rows in dimension {m}",
            r + 1
        )));
    }
    let basis = lattice_basis(a)?;
    let lineal =
        lattice_subspace_intersection(&basis, &decomposition.lineality_basis.to_rational())?;
    let mut columns = lineal.columns();
    let closing: Vec<BigInt> = (0..m)
        .map(|i| -columns.iter().map(|c| &c[i]).sum::<BigInt>())
        .collect();
    columns.push(closing);
    columns.extend(decomposition.pointed_part.columns());
    let a_tilde = IntMatrix::from_columns(m, &columns)?;

    let mut separating = Vec::with_capacity(r + 1);
    for l in 0..=r {
        let keep: Vec<usize> = (0..a_tilde.cols()).filter(|&j| j != l).collect();
        separating.push(separating_vector(&a_tilde.select_columns(&keep))?.h);
    }
    let b_l1 = l1_norm(sys.b());
    let coeff_bound = separating
        .iter()
        .map(|h| (inf_norm(h) + BigInt::one()) * &b_l1)
        .max()
        .expect("r + 1 >= 2 rows");
    let big_m = a_tilde.infinity_norm() * coeff_bound + inf_norm(sys.b());
    let set = coprime_above(m, &big_m);
    let eta = reciprocals(&set.moduli);
    let rows: Vec<Vec<BigRational>> = separating
        .iter()
        .enumerate()
        .map(|(l, h)| {
            h.iter()
                .zip(&eta)
                .map(|(x, e)| {
                    let x = BigRational::from_integer(x.clone());
                    if l == 0 {
                        x + e
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    let t = RatMatrix::from_rows(rows)?;
    debug_assert_eq!(linalg::rank(&t), r + 1);
    Ok(AggregationMatrix::new(
        t,
        AggregationKind::Strong,
        None,
        Provenance {
            moduli: set.moduli,
            separating,
            bound: Some(big_m),
            threshold: None,
            lineality_dim: Some(r),
        },
    ))
}

/// Picks the strong construction matching the system: bounded when `u` is
/// present, otherwise the minimum-size general one. Systems with
/// `b` outside `L(A)` are rejected as [`Error::InfeasibleByLattice`].
pub fn aggregate_strong(sys: &DiophantineSystem) -> Result<AggregationMatrix> {
    if sys.upper_bounds().is_some() {
        aggregate_bounded(sys)
    } else {
        let basis = lattice_basis(sys.a())?;
        if member(&basis, sys.b())?.is_none() {
            return Err(Error::InfeasibleByLattice);
        }
        aggregate_general(sys)
    }
}

/// A nonnegative integer `x_T` solving `T A x = T b` but not `A x = b`, for
/// any `T` with at most `r` rows and any solution `x_star`.
///
/// Finds a nonzero rational `y ∈ ker(T) ∩ C(A)`: either inside `R` when
/// `ker(T) ∩ R ≠ {0}`, or as the `ker(T)` component of a pointed column in
/// the decomposition `R^m = ker(T) ⊕ R`. Then `x_T = x_star + λ x̃` with
/// `A x̃ = y`, `x̃ >= 0` and `λ` clearing denominators.
pub fn lower_bound_witness(
    sys: &DiophantineSystem,
    t: &RatMatrix,
    x_star: &[BigInt],
) -> Result<Vec<BigInt>> {
    let a = sys.a();
    let m = sys.rows();
    if t.cols() != m {
        return Err(Error::DimensionMismatch(format!(
            "aggregation matrix has {} columns, expected {m}",
            t.cols()
        )));
    }
    if !sys.without_bounds().is_solution(x_star) {
        return Err(Error::WitnessNotFound(
            "x_star does not solve the system".into(),
        ));
    }
    let decomposition = decompose_cone(a)?;
    let r = decomposition.r;
    if t.rows() > r {
        return Err(Error::WitnessNotFound(format!(
            "{} rows exceed the lineality dimension {r}",
            t.rows()
        )));
    }
    let r_basis = decomposition.lineality_basis.to_rational();
    let in_r = linalg::rational_kernel_basis(&t.matmul(&r_basis)?);
    let direction: Vec<BigRational> = if in_r.cols() > 0 {
        r_basis.mul_vec(&linalg::to_rational_vec(&in_r.column(0)))?
    } else {
        let h_basis = linalg::rational_kernel_basis(t).to_rational();
        let &p = decomposition
            .pointed_cols
            .first()
            .ok_or_else(|| Error::WitnessNotFound("no pointed column".into()))?;
        let mut cols = h_basis.columns();
        cols.extend(r_basis.columns());
        let joint = RatMatrix::from_columns(m, &cols)?;
        let inv = linalg::invert_rational(&joint).map_err(|_| {
            Error::WitnessNotFound("kernel of T and R do not split the space".into())
        })?;
        let coeffs = inv.mul_vec(&linalg::to_rational_vec(&a.column(p)))?;
        let hk = h_basis.cols();
        h_basis.mul_vec(&coeffs[..hk])?
    };
    let preimage = cone_preimage(a, &direction)?
        .ok_or_else(|| Error::WitnessNotFound("direction is not in the cone".into()))?;
    let (scaled, _) = linalg::clear_denominators(&preimage);
    let x_t: Vec<BigInt> = x_star.iter().zip(&scaled).map(|(x, s)| x + s).collect();

    let agg = AggregationMatrix::from_matrix(t.clone());
    let (ta, tb) = agg.apply(sys)?;
    let lhs = ta.mul_vec(&linalg::to_rational_vec(&x_t))?;
    let ax = a.mul_vec(&x_t)?;
    if lhs != tb || ax == sys.b() || x_t.iter().any(Signed::is_negative) {
        return Err(Error::WitnessNotFound(
            "constructed point failed verification".into(),
        ));
    }
    Ok(x_t)
}

/// `ceil(prod_i ||(A | b)_i||_2)`, the Hadamard bound on the `m x m` minors
/// of the augmented matrix.
pub fn hadamard_bound(a: &IntMatrix, b: &[BigInt]) -> BigInt {
    let product: BigInt = (0..a.rows())
        .map(|i| a.row(i).iter().map(|x| x * x).sum::<BigInt>() + &b[i] * &b[i])
        .product();
    let root = product.sqrt();
    if &root * &root == product {
        root
    } else {
        root + BigInt::one()
    }
}

/// Box `u*_j = (n + 1) Δ` that contains a solution of every feasible system.
pub fn weak_bounds(sys: &DiophantineSystem) -> Vec<BigInt> {
    let n = sys.cols();
    let delta = hadamard_bound(sys.a(), sys.b());
    vec![BigInt::from(n + 1) * delta; n]
}

/// Size-one weak aggregation: bound the variables by [`weak_bounds`] and
/// aggregate the bounded system strongly. A system that already carries
/// bounds keeps them.
pub fn aggregate_weak(sys: &DiophantineSystem) -> Result<AggregationMatrix> {
    let bounds = match sys.upper_bounds() {
        Some(u) => u.to_vec(),
        None => weak_bounds(sys),
    };
    let bounded = sys.with_bounds(bounds.clone())?;
    let strong = aggregate_bounded(&bounded)?;
    Ok(AggregationMatrix::new(
        strong.t,
        AggregationKind::Weak,
        Some(bounds),
        strong.provenance,
    ))
}

/// Rows of `T` must be independent for the size to mean anything.
pub fn has_independent_rows(agg: &AggregationMatrix) -> bool {
    linalg::rank(agg.t()) == agg.size()
}

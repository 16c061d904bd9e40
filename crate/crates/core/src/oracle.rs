//! Brute-force ground truth: enumeration of nonnegative integer solutions
//! inside a box, and comparison of a system with its aggregation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::aggregation::{AggregationMatrix, DiophantineSystem};
use crate::error::{Error, Result};
use crate::linalg::{self, RatMatrix};

/// Default bound on the number of points in an enumeration box.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Environment variable overriding [`DEFAULT_ENUM_CAP`].
pub const ENUM_CAP_VAR: &str = "DAGG_ENUM_CAP";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    /// Lexicographically sorted, without duplicates.
    pub solutions: Vec<Vec<BigInt>>,
    pub window: Vec<BigInt>,
    pub complete_within_window: bool,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn contains(&self, x: &[BigInt]) -> bool {
        self.solutions
            .binary_search_by(|s| s.as_slice().cmp(x))
            .is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Equal,
    /// A point of the aggregated system that does not solve the original.
    CounterexampleFound(Vec<BigInt>),
}

impl Certificate {
    pub fn is_equal(&self) -> bool {
        matches!(self, Certificate::Equal)
    }
}

/// Box enumerator over `0 <= x <= window` with a cap on the box size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Enumerator {
    cap: u64,
}

impl Default for Enumerator {
    fn default() -> Self {
        Self::new(DEFAULT_ENUM_CAP)
    }
}

impl Enumerator {
    pub fn new(cap: u64) -> Self {
        Self { cap }
    }

    /// Reads the cap from `DAGG_ENUM_CAP`, falling back to the default.
    pub fn from_env() -> Self {
        let cap = std::env::var(ENUM_CAP_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_ENUM_CAP);
        Self::new(cap)
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// All `x` in the box satisfying `a x = rhs` exactly.
    pub fn enumerate(
        &self,
        a: &RatMatrix,
        rhs: &[BigRational],
        window: &[BigInt],
    ) -> Result<SolutionSet> {
        let search = Search::new(a, rhs, window, self.cap)?;
        let mut solutions = Vec::new();
        search.run(&mut |x| {
            solutions.push(x.to_vec());
            true
        });
        Ok(SolutionSet {
            solutions,
            window: window.to_vec(),
            complete_within_window: true,
        })
    }

    /// The lexicographically first solution in the box, if any.
    pub fn first_solution(
        &self,
        a: &RatMatrix,
        rhs: &[BigRational],
        window: &[BigInt],
    ) -> Result<Option<Vec<BigInt>>> {
        let search = Search::new(a, rhs, window, self.cap)?;
        let mut found = None;
        search.run(&mut |x| {
            found = Some(x.to_vec());
            false
        });
        Ok(found)
    }

    pub fn enumerate_system(
        &self,
        sys: &DiophantineSystem,
        window: &[BigInt],
    ) -> Result<SolutionSet> {
        let window = clip_to_bounds(sys, window)?;
        let (a, b) = rational_system(sys);
        self.enumerate(&a, &b, &window)
    }

    /// Compares the solutions of `sys` and of `(T A, T b)` (with the same
    /// upper bounds) inside `window`.
    ///
    /// Every solution of the original solves the aggregated system, so the
    /// sets differ exactly when some aggregated solution is spurious. The
    /// lexicographically largest spurious point is reported.
    pub fn certify_matrix(
        &self,
        sys: &DiophantineSystem,
        t: &RatMatrix,
        window: &[BigInt],
    ) -> Result<Certificate> {
        let window = clip_to_bounds(sys, window)?;
        let ta = t.matmul(&sys.a().to_rational())?;
        let tb = t.mul_vec(&linalg::to_rational_vec(sys.b()))?;
        let search = Search::new(&ta, &tb, &window, self.cap)?;
        let mut spurious = None;
        search.run(&mut |x| {
            if !sys.a().mul_vec(x).map(|ax| ax == sys.b()).unwrap_or(false) {
                spurious = Some(x.to_vec());
            }
            true
        });
        Ok(spurious.map_or(Certificate::Equal, Certificate::CounterexampleFound))
    }

    pub fn certify_strong(
        &self,
        sys: &DiophantineSystem,
        agg: &AggregationMatrix,
        window: &[BigInt],
    ) -> Result<Certificate> {
        self.certify_matrix(sys, agg.t(), window)
    }

    /// A solution of `sys` inside the window, if any.
    pub fn feasible_within(
        &self,
        sys: &DiophantineSystem,
        window: &[BigInt],
    ) -> Result<Option<Vec<BigInt>>> {
        let window = clip_to_bounds(sys, window)?;
        let (a, b) = rational_system(sys);
        self.first_solution(&a, &b, &window)
    }
}

/// [`Enumerator::enumerate`] with the cap taken from the environment.
pub fn enumerate(a: &RatMatrix, rhs: &[BigRational], window: &[BigInt]) -> Result<SolutionSet> {
    Enumerator::from_env().enumerate(a, rhs, window)
}

/// [`Enumerator::certify_strong`] with the cap taken from the environment.
pub fn certify_strong(
    sys: &DiophantineSystem,
    agg: &AggregationMatrix,
    window: &[BigInt],
) -> Result<Certificate> {
    Enumerator::from_env().certify_strong(sys, agg, window)
}

fn rational_system(sys: &DiophantineSystem) -> (RatMatrix, Vec<BigRational>) {
    (sys.a().to_rational(), linalg::to_rational_vec(sys.b()))
}

fn clip_to_bounds(sys: &DiophantineSystem, window: &[BigInt]) -> Result<Vec<BigInt>> {
    if window.len() != sys.cols() {
        return Err(Error::DimensionMismatch(format!(
            "window has length {}, system has {} variables",
            window.len(),
            sys.cols()
        )));
    }
    Ok(match sys.upper_bounds() {
        Some(u) => window
            .iter()
            .zip(u)
            .map(|(w, u)| w.min(u).clone())
            .collect(),
        None => window.to_vec(),
    })
}

/// Depth-first search over the box, one coordinate at a time.
///
/// At each depth the feasible range of the next coordinate is cut down using,
/// for every row, the interval the remaining coordinates can still reach.
struct Search {
    rows: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
    window: Vec<BigInt>,
    /// `suffix_min[i][j]` is the least value of `sum_{l>=j} a_il x_l`.
    suffix_min: Vec<Vec<BigInt>>,
    suffix_max: Vec<Vec<BigInt>>,
    empty: bool,
}

impl Search {
    fn new(a: &RatMatrix, rhs: &[BigRational], window: &[BigInt], cap: u64) -> Result<Self> {
        let n = a.cols();
        if rhs.len() != a.rows() || window.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} system with {} right-hand sides and a window of length {}",
                a.rows(),
                n,
                rhs.len(),
                window.len()
            )));
        }
        if window.iter().any(Signed::is_negative) {
            return Err(Error::InvalidSystem("window must be nonnegative".into()));
        }
        let mut rows = Vec::with_capacity(a.rows());
        let mut ints = Vec::with_capacity(a.rows());
        for i in 0..a.rows() {
            let mut row = a.row(i).to_vec();
            row.push(rhs[i].clone());
            let (mut r, _) = linalg::clear_denominators(&row);
            ints.push(r.pop().expect("rhs entry"));
            rows.push(r);
        }
        let mut window = window.to_vec();
        let mut empty = false;
        // single-row bounds: a row with coefficients of one sign caps x_j
        for (row, b) in rows.iter().zip(&ints) {
            let sign = if row.iter().all(|v| !v.is_negative()) {
                BigInt::one()
            } else if row.iter().all(|v| !v.is_positive()) {
                -BigInt::one()
            } else {
                continue;
            };
            let b = b * &sign;
            if b.is_negative() {
                empty = true;
                continue;
            }
            for (w, v) in window.iter_mut().zip(row) {
                let v = v * &sign;
                if v.is_positive() {
                    let lim = b.div_floor(&v);
                    if lim < *w {
                        *w = lim;
                    }
                }
            }
        }
        let points = window
            .iter()
            .fold(BigInt::one(), |acc, w| acc * (w + BigInt::one()));
        if !empty && points > BigInt::from(cap) {
            return Err(Error::WindowTooLarge {
                points: points.to_string(),
                cap,
            });
        }
        let mut suffix_min = Vec::with_capacity(rows.len());
        let mut suffix_max = Vec::with_capacity(rows.len());
        for row in &rows {
            let mut lo = vec![BigInt::zero(); n + 1];
            let mut hi = vec![BigInt::zero(); n + 1];
            for j in (0..n).rev() {
                let reach = &row[j] * &window[j];
                lo[j] = &lo[j + 1] + reach.clone().min(BigInt::zero());
                hi[j] = &hi[j + 1] + reach.max(BigInt::zero());
            }
            suffix_min.push(lo);
            suffix_max.push(hi);
        }
        Ok(Self {
            rows,
            rhs: ints,
            window,
            suffix_min,
            suffix_max,
            empty,
        })
    }

    /// Calls `visit` on each solution in lexicographic order until it
    /// returns `false`.
    fn run(&self, visit: &mut dyn FnMut(&[BigInt]) -> bool) {
        if self.empty {
            return;
        }
        let mut x = vec![BigInt::zero(); self.window.len()];
        let mut residual = self.rhs.clone();
        self.descend(0, &mut x, &mut residual, visit);
    }

    fn descend(
        &self,
        j: usize,
        x: &mut Vec<BigInt>,
        residual: &mut Vec<BigInt>,
        visit: &mut dyn FnMut(&[BigInt]) -> bool,
    ) -> bool {
        if j == x.len() {
            return if residual.iter().all(Zero::is_zero) {
                visit(x)
            } else {
                true
            };
        }
        let Some((lo, hi)) = self.range(j, residual) else {
            return true;
        };
        let (Some(lo), Some(hi)) = (lo.to_u64(), hi.to_u64()) else {
            return true;
        };
        for v in lo..=hi {
            let v = BigInt::from(v);
            for (r, row) in residual.iter_mut().zip(&self.rows) {
                *r -= &row[j] * &v;
            }
            x[j] = v.clone();
            let keep_going = self.descend(j + 1, x, residual, visit);
            for (r, row) in residual.iter_mut().zip(&self.rows) {
                *r += &row[j] * &v;
            }
            if !keep_going {
                return false;
            }
        }
        x[j] = BigInt::zero();
        true
    }

    /// Values of `x_j` leaving every row solvable by the later coordinates.
    fn range(&self, j: usize, residual: &[BigInt]) -> Option<(BigInt, BigInt)> {
        let mut lo = BigInt::zero();
        let mut hi = self.window[j].clone();
        for (i, row) in self.rows.iter().enumerate() {
            let a = &row[j];
            let r = &residual[i];
            // need r - a x in [suffix_min, suffix_max] of the tail
            let low_t = r - &self.suffix_max[i][j + 1];
            let high_t = r - &self.suffix_min[i][j + 1];
            if a.is_zero() {
                if low_t.is_positive() || high_t.is_negative() {
                    return None;
                }
                continue;
            }
            let (l, h) = if a.is_positive() {
                (Integer::div_ceil(&low_t, a), high_t.div_floor(a))
            } else {
                (Integer::div_ceil(&high_t, a), low_t.div_floor(a))
            };
            lo = lo.max(l);
            hi = hi.min(h);
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn rat_rows(rows: &[&[i64]]) -> RatMatrix {
        crate::linalg::IntMatrix::from_i64_rows(rows)
            .unwrap()
            .to_rational()
    }

    fn rhs(v: &[i64]) -> Vec<BigRational> {
        linalg::to_rational_vec(&big(v))
    }

    fn intro() -> DiophantineSystem {
        DiophantineSystem::from_i64(&[&[1, 2], &[2, 1]], &[3, 3], None).unwrap()
    }

    fn row_t(v: &[i64]) -> RatMatrix {
        rat_rows(&[v])
    }

    #[test]
    fn intro_solutions() {
        let e = Enumerator::default();
        let s = e
            .enumerate(&rat_rows(&[&[1, 2], &[2, 1]]), &rhs(&[3, 3]), &big(&[3, 3]))
            .unwrap();
        assert_eq!(s.solutions, vec![big(&[1, 1])]);
        assert!(s.complete_within_window);
    }

    #[test]
    fn single_equation_solutions() {
        let e = Enumerator::default();
        let s = e
            .enumerate(&rat_rows(&[&[3, 3]]), &rhs(&[6]), &big(&[2, 2]))
            .unwrap();
        assert_eq!(s.solutions, vec![big(&[0, 2]), big(&[1, 1]), big(&[2, 0])]);
    }

    #[test]
    fn zero_window() {
        let e = Enumerator::default();
        let s = e
            .enumerate(&rat_rows(&[&[1, -1, 2]]), &rhs(&[0]), &big(&[0, 0, 0]))
            .unwrap();
        assert_eq!(s.solutions, vec![big(&[0, 0, 0])]);
    }

    #[test]
    fn rational_rows() {
        let e = Enumerator::default();
        let a = RatMatrix::from_rows(vec![vec![
            BigRational::new(1.into(), 2.into()),
            BigRational::new(1.into(), 3.into()),
        ]])
        .unwrap();
        let s = e.enumerate(&a, &rhs(&[1]), &big(&[5, 5])).unwrap();
        assert_eq!(s.solutions, vec![big(&[0, 3]), big(&[2, 0])]);
    }

    #[test]
    fn certify_intro_fixtures() {
        let e = Enumerator::default();
        let sys = intro();
        assert_eq!(
            e.certify_matrix(&sys, &row_t(&[1, 2]), &big(&[3, 3]))
                .unwrap(),
            Certificate::Equal
        );
        assert_eq!(
            e.certify_matrix(&sys, &row_t(&[1, 1]), &big(&[3, 3]))
                .unwrap(),
            Certificate::CounterexampleFound(big(&[2, 0]))
        );
        let id = RatMatrix::identity(2);
        assert!(e
            .certify_matrix(&sys, &id, &big(&[3, 3]))
            .unwrap()
            .is_equal());
    }

    #[test]
    fn window_cap() {
        let e = Enumerator::new(100);
        let err = e
            .enumerate(&rat_rows(&[&[1, -1]]), &rhs(&[0]), &big(&[10, 10]))
            .unwrap_err();
        assert!(matches!(err, Error::WindowTooLarge { .. }));
        // a nonnegative row shrinks the box below the cap
        let s = e
            .enumerate(&rat_rows(&[&[1, 1]]), &rhs(&[3]), &big(&[1000, 1000]))
            .unwrap();
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn monotone_in_window() {
        let e = Enumerator::default();
        let a = rat_rows(&[&[1, -1, 0], &[0, 0, 1]]);
        let small = e.enumerate(&a, &rhs(&[0, 1]), &big(&[2, 2, 2])).unwrap();
        let large = e.enumerate(&a, &rhs(&[0, 1]), &big(&[3, 3, 3])).unwrap();
        assert!(small.solutions.iter().all(|x| large.contains(x)));
        assert_eq!(large.len(), 4);
    }

    #[test]
    fn infeasible_sign() {
        let e = Enumerator::default();
        let s = e
            .enumerate(&rat_rows(&[&[1, 1]]), &rhs(&[-1]), &big(&[3, 3]))
            .unwrap();
        assert!(s.is_empty());
        assert_eq!(
            e.feasible_within(&intro(), &big(&[3, 3])).unwrap(),
            Some(big(&[1, 1]))
        );
    }

    #[test]
    fn bounded_system_is_clipped() {
        let e = Enumerator::default();
        let sys = DiophantineSystem::from_i64(&[&[1, 1]], &[4], Some(&[2, 3])).unwrap();
        let s = e.enumerate_system(&sys, &big(&[10, 10])).unwrap();
        assert_eq!(s.solutions, vec![big(&[1, 3]), big(&[2, 2])]);
    }
}

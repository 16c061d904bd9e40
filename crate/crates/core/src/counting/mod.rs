//! Counting nonnegative integer solutions of one knapsack equation
//! `sum_j alpha_j x_j = beta`, optionally with `x <= u`.
//!
//! The count is the coefficient of `X^beta` in
//! `P(X) = prod_l sum_{j<=u_l} X^{j alpha_l}` (bounded) or
//! `Q(X) = prod_l 1 / (1 - X^{alpha_l})` (unbounded). [`count_dp`] extracts it
//! exactly by polynomial multiplication truncated at degree `beta`; the
//! [`spectral`] evaluators recover it from samples of `P` on the unit circle
//! and of `Q` on the circle of radius 1/2.

mod spectral;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::aggregation::{
    aggregate_bounded, aggregate_pointed, aggregate_weak, AggregationKind, AggregationMatrix,
    DiophantineSystem,
};
use crate::error::{Error, Result};
use crate::linalg;

pub use spectral::{alias_bound, count_spectral_bounded, count_spectral_unbounded};

/// `sum alpha_j x_j = beta` with `alpha >= 0`, `x >= 0`, optionally `x <= u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnapsackEquation {
    pub alpha: Vec<BigInt>,
    pub beta: BigInt,
    pub bounds: Option<Vec<BigInt>>,
}

impl KnapsackEquation {
    pub fn new(alpha: Vec<BigInt>, beta: BigInt, bounds: Option<Vec<BigInt>>) -> Result<Self> {
        if let Some(u) = &bounds {
            if u.len() != alpha.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} bounds for {} coefficients",
                    u.len(),
                    alpha.len()
                )));
            }
            if u.iter().any(Signed::is_negative) {
                return Err(Error::InvalidCoefficients(
                    "bounds must be nonnegative".into(),
                ));
            }
        }
        Ok(Self {
            alpha,
            beta,
            bounds,
        })
    }

    pub fn from_i64(alpha: &[i64], beta: i64, bounds: Option<&[i64]>) -> Result<Self> {
        let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        Self::new(big(alpha), BigInt::from(beta), bounds.map(big))
    }

    /// The single aggregated equation `T A x = T b` with denominators
    /// cleared and the common content removed.
    ///
    /// When the system is bounded (by its own `u` or by bounds the
    /// aggregation introduced), negative coefficients are made nonnegative by
    /// substituting `x_j <- u_j - x_j`, which is a bijection of the box.
    pub fn from_aggregation(sys: &DiophantineSystem, agg: &AggregationMatrix) -> Result<Self> {
        if agg.size() != 1 {
            return Err(Error::UnsupportedRegime(format!(
                "counting needs a single aggregated equation, got {}",
                agg.size()
            )));
        }
        let (ta, tb) = agg.apply(sys)?;
        let mut row = ta.row(0).to_vec();
        row.push(tb[0].clone());
        let (ints, _) = linalg::clear_denominators(&row);
        let mut ints = linalg::primitive_part(&ints);
        let mut beta = ints.pop().expect("row has the right-hand side");
        let mut alpha = ints;
        let bounds = agg
            .introduced_bounds()
            .or(sys.upper_bounds())
            .map(<[BigInt]>::to_vec);
        if let Some(u) = &bounds {
            for (a, ub) in alpha.iter_mut().zip(u) {
                if a.is_negative() {
                    beta -= &*a * ub;
                    *a = -&*a;
                }
            }
        }
        Self::new(alpha, beta, bounds)
    }

    pub fn is_bounded(&self) -> bool {
        self.bounds.is_some()
    }

    /// Degree of `P`, `sum alpha_l u_l`, for bounded equations.
    pub fn degree(&self) -> Option<BigInt> {
        self.bounds
            .as_ref()
            .map(|u| self.alpha.iter().zip(u).map(|(a, b)| a * b).sum())
    }

    fn check_nonnegative(&self) -> Result<()> {
        match self.alpha.iter().position(Signed::is_negative) {
            Some(j) => Err(Error::InvalidCoefficients(format!(
                "coefficient {j} is negative"
            ))),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    Dp,
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountResult {
    pub count: BigInt,
    pub method: CountMethod,
    /// Pre-rounding estimate (spectral only).
    pub estimate: Option<f64>,
    /// Bound on `|estimate - count|` (spectral only).
    pub error_bound: Option<f64>,
    /// Number of sample points used (spectral only).
    pub samples: Option<usize>,
}

impl CountResult {
    fn exact(count: BigInt) -> Self {
        Self {
            count,
            method: CountMethod::Dp,
            estimate: None,
            error_bound: None,
            samples: None,
        }
    }
}

/// Resource caps for the counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountLimits {
    /// Largest `beta` the counting DP will allocate for.
    pub dp_max_degree: u64,
    /// Largest `beta` the bitset feasibility DP will allocate for.
    pub feasibility_max_degree: u64,
    /// Largest sample count for the bounded spectral evaluator.
    pub spectral_max_samples: u64,
    /// Largest `beta` for the unbounded spectral evaluator, whose working
    /// precision grows linearly with `beta`.
    pub unbounded_max_rhs: u64,
}

impl Default for CountLimits {
    fn default() -> Self {
        Self {
            dp_max_degree: 10_000_000,
            feasibility_max_degree: 1 << 30,
            spectral_max_samples: 1 << 20,
            unbounded_max_rhs: 2048,
        }
    }
}

fn degree_to_usize(beta: &BigInt, cap: u64) -> Result<usize> {
    match beta.to_u64() {
        Some(b) if b <= cap => Ok(b as usize),
        _ => Err(Error::DegreeOverflow {
            degree: beta.to_string(),
            cap,
        }),
    }
}

/// Exact coefficient extraction with the default limits.
pub fn count_dp(eq: &KnapsackEquation) -> Result<CountResult> {
    count_dp_with(eq, &CountLimits::default())
}

pub fn count_dp_with(eq: &KnapsackEquation, limits: &CountLimits) -> Result<CountResult> {
    eq.check_nonnegative()?;
    if eq.beta.is_negative() {
        return Ok(CountResult::exact(BigInt::zero()));
    }
    let beta = degree_to_usize(&eq.beta, limits.dp_max_degree)?;
    let mut coeffs = vec![BigUint::zero(); beta + 1];
    coeffs[0] = BigUint::one();
    let mut has_free_zero = false;
    for (l, a) in eq.alpha.iter().enumerate() {
        match &eq.bounds {
            Some(u) => multiply_bounded(&mut coeffs, a, &u[l]),
            None if a.is_zero() => has_free_zero = true,
            None => multiply_geometric(&mut coeffs, a),
        }
    }
    let count = coeffs.swap_remove(beta);
    if has_free_zero && !count.is_zero() {
        return Err(Error::InfiniteCount);
    }
    Ok(CountResult::exact(BigInt::from_biguint(Sign::Plus, count)))
}

/// All coefficients `gamma_0..gamma_D` of the bounded generating polynomial.
///
/// They sum to `prod (u_l + 1)`, the number of points in the box.
pub fn bounded_coefficients(eq: &KnapsackEquation, limits: &CountLimits) -> Result<Vec<BigUint>> {
    eq.check_nonnegative()?;
    let u = eq
        .bounds
        .as_ref()
        .ok_or_else(|| Error::UnsupportedRegime("polynomial needs bounds".into()))?;
    let degree = degree_to_usize(&eq.degree().expect("bounded"), limits.dp_max_degree)?;
    let mut coeffs = vec![BigUint::zero(); degree + 1];
    coeffs[0] = BigUint::one();
    for (a, ul) in eq.alpha.iter().zip(u) {
        multiply_bounded(&mut coeffs, a, ul);
    }
    Ok(coeffs)
}

/// Multiplies by `sum_{j=0}^{u} X^{j a}`, truncating at the current degree.
fn multiply_bounded(coeffs: &mut [BigUint], a: &BigInt, u: &BigInt) {
    if u.is_zero() {
        return;
    }
    if a.is_zero() {
        let factor = (u + BigInt::one()).to_biguint().expect("u >= 0");
        for c in coeffs.iter_mut() {
            *c *= &factor;
        }
        return;
    }
    let len = coeffs.len();
    let Some(step) = a.to_usize().filter(|&s| s < len) else {
        return;
    };
    // window = (u + 1) * a, or beyond the degree when it cannot matter
    let window = u
        .to_usize()
        .and_then(|u| u.checked_add(1))
        .and_then(|w| w.checked_mul(step))
        .filter(|&w| w < len);
    let old = coeffs.to_vec();
    for d in step..len {
        let mut v = &coeffs[d] + &coeffs[d - step];
        if let Some(w) = window {
            if d >= w {
                v -= &old[d - w];
            }
        }
        coeffs[d] = v;
    }
}

/// Multiplies by `1 / (1 - X^a)` for `a > 0`.
fn multiply_geometric(coeffs: &mut [BigUint], a: &BigInt) {
    let len = coeffs.len();
    let Some(step) = a.to_usize().filter(|&s| s < len) else {
        return;
    };
    for d in step..len {
        let v = &coeffs[d] + &coeffs[d - step];
        coeffs[d] = v;
    }
}

/// Whether the equation has any solution, by a bitset reachability DP.
///
/// Bounded multiplicities are split into powers of two so each variable
/// costs `O(log u)` shifted ORs.
pub fn is_feasible_dp(eq: &KnapsackEquation, limits: &CountLimits) -> Result<bool> {
    eq.check_nonnegative()?;
    if eq.beta.is_negative() {
        return Ok(false);
    }
    let beta = degree_to_usize(&eq.beta, limits.feasibility_max_degree)?;
    let mut reach = Bitset::new(beta + 1);
    reach.set(0);
    for (l, a) in eq.alpha.iter().enumerate() {
        let Some(step) = a.to_usize().filter(|&s| s > 0 && s <= beta) else {
            continue;
        };
        let max_copies = beta / step;
        let copies = match &eq.bounds {
            Some(u) => u[l].to_usize().map_or(max_copies, |u| u.min(max_copies)),
            None => max_copies,
        };
        let mut remaining = copies;
        let mut chunk = 1;
        while remaining > 0 {
            let take = chunk.min(remaining);
            reach.or_shifted(take * step);
            remaining -= take;
            chunk *= 2;
        }
    }
    Ok(reach.get(beta))
}

struct Bitset {
    words: Vec<u64>,
    len: usize,
}

impl Bitset {
    fn new(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// `self |= self << shift`, truncated to the length.
    fn or_shifted(&mut self, shift: usize) {
        if shift >= self.len {
            return;
        }
        let (ws, bs) = (shift / 64, shift % 64);
        for i in (ws..self.words.len()).rev() {
            let src = i - ws;
            let mut v = self.words[src] << bs;
            if bs > 0 && src > 0 {
                v |= self.words[src - 1] >> (64 - bs);
            }
            self.words[i] |= v;
        }
        let tail = self.len % 64;
        if tail > 0 {
            let last = self.words.len() - 1;
            self.words[last] &= (1u64 << tail) - 1;
        }
    }
}

/// Counts for a system through one of its size-one aggregations.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemCount {
    pub feasible: bool,
    /// `None` when only feasibility can be decided (non-pointed, unbounded).
    pub count: Option<BigInt>,
    pub dp: Option<CountResult>,
    pub spectral: Option<CountResult>,
}

impl SystemCount {
    fn infeasible() -> Self {
        Self {
            feasible: false,
            count: Some(BigInt::zero()),
            dp: None,
            spectral: None,
        }
    }

    /// Whether both counters ran and agree.
    pub fn methods_agree(&self) -> Option<bool> {
        match (&self.dp, &self.spectral) {
            (Some(d), Some(s)) => Some(d.count == s.count),
            _ => None,
        }
    }
}

/// Which counters [`count_system`] runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Dp,
    Spectral,
    Both,
}

/// Counts solutions of `sys` using a size-one aggregation `agg`.
///
/// A strong `agg` yields the exact count. A weak one only decides
/// feasibility, through the bounds it introduced. Spectral failures caused
/// by resource caps are tolerated when the DP also runs.
pub fn count_system(
    sys: &DiophantineSystem,
    agg: &AggregationMatrix,
    choice: MethodChoice,
    limits: &CountLimits,
) -> Result<SystemCount> {
    let eq = KnapsackEquation::from_aggregation(sys, agg)?;
    if agg.kind() == AggregationKind::Weak {
        return Ok(SystemCount {
            feasible: is_feasible_dp(&eq, limits)?,
            count: None,
            dp: None,
            spectral: None,
        });
    }
    let dp = match choice {
        MethodChoice::Dp | MethodChoice::Both => Some(count_dp_with(&eq, limits)?),
        MethodChoice::Spectral => None,
    };
    let spectral = match choice {
        MethodChoice::Dp => None,
        _ => {
            let res = if eq.is_bounded() {
                spectral::count_spectral_bounded_with(&eq, limits)
            } else {
                spectral::count_spectral_unbounded_with(&eq, limits)
            };
            match res {
                Ok(r) => Some(r),
                Err(Error::DegreeOverflow { .. }) if dp.is_some() => None,
                Err(e) => return Err(e),
            }
        }
    };
    let count = dp
        .as_ref()
        .or(spectral.as_ref())
        .map(|r| r.count.clone())
        .expect("at least one method ran");
    Ok(SystemCount {
        feasible: !count.is_zero(),
        count: Some(count),
        dp,
        spectral,
    })
}

/// Counts solutions of `sys`, choosing the aggregation by regime: bounded
/// systems and pointed cones give exact counts, anything else is bounded
/// artificially and decided for feasibility only.
pub fn count_solutions(
    sys: &DiophantineSystem,
    choice: MethodChoice,
    limits: &CountLimits,
) -> Result<SystemCount> {
    let agg = if sys.upper_bounds().is_some() {
        aggregate_bounded(sys)
    } else {
        match aggregate_pointed(sys) {
            Err(Error::NotPointed) => aggregate_weak(sys),
            other => other,
        }
    };
    match agg {
        Ok(agg) => count_system(sys, &agg, choice, limits),
        Err(Error::InfeasibleByLattice) => Ok(SystemCount::infeasible()),
        Err(e) => Err(e),
    }
}

/// `gcd` of the coefficients, used to discard equations with no solution early.
pub fn content(eq: &KnapsackEquation) -> BigInt {
    eq.alpha.iter().fold(BigInt::zero(), |acc, a| acc.gcd(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq(alpha: &[i64], beta: i64, u: Option<&[i64]>) -> KnapsackEquation {
        KnapsackEquation::from_i64(alpha, beta, u).unwrap()
    }

    fn dp(alpha: &[i64], beta: i64, u: Option<&[i64]>) -> BigInt {
        count_dp(&eq(alpha, beta, u)).unwrap().count
    }

    #[test]
    fn dp_examples() {
        assert_eq!(dp(&[5, 4], 9, None), BigInt::from(1));
        assert_eq!(dp(&[3, 3], 6, Some(&[2, 2])), BigInt::from(3));
        assert_eq!(dp(&[1, 2], 4, None), BigInt::from(3));
        assert_eq!(dp(&[1], 0, None), BigInt::from(1));
    }

    #[test]
    fn dp_zero_coefficients() {
        assert_eq!(dp(&[0, 1], 3, Some(&[4, 5])), BigInt::from(5));
        assert_eq!(count_dp(&eq(&[0, 1], 3, None)), Err(Error::InfiniteCount));
        assert_eq!(dp(&[0, 2], 3, None), BigInt::zero());
        assert!(matches!(
            count_dp(&eq(&[-1, 2], 3, None)),
            Err(Error::InvalidCoefficients(_))
        ));
        assert_eq!(dp(&[1, 2], -1, None), BigInt::zero());
    }

    #[test]
    fn dp_respects_cap() {
        let limits = CountLimits {
            dp_max_degree: 10,
            ..CountLimits::default()
        };
        assert!(matches!(
            count_dp_with(&eq(&[1], 11, None), &limits),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn bitset_feasibility() {
        let limits = CountLimits::default();
        let cases: &[(&[i64], i64, Option<&[i64]>)] = &[
            (&[5, 4], 9, None),
            (&[5, 4], 11, None),
            (&[3, 3], 6, Some(&[2, 2])),
            (&[3, 7], 20, Some(&[1, 5])),
            (&[64, 3], 131, Some(&[2, 1])),
            (&[70], 140, Some(&[1])),
        ];
        for &(a, b, u) in cases {
            let e = eq(a, b, u);
            let expected = !count_dp(&e).unwrap().count.is_zero();
            assert_eq!(
                is_feasible_dp(&e, &limits).unwrap(),
                expected,
                "{a:?} {b} {u:?}"
            );
        }
    }

    #[test]
    fn equation_from_intro_aggregation() {
        let sys = DiophantineSystem::from_i64(&[&[1, 2], &[2, 1]], &[3, 3], Some(&[3, 3])).unwrap();
        let agg = aggregate_bounded(&sys).unwrap();
        let e = KnapsackEquation::from_aggregation(&sys, &agg).unwrap();
        // (35/16, -1) A = (3/16, 54/16), (35/16, -1) b = 57/16
        assert_eq!(e, eq(&[1, 18], 19, Some(&[3, 3])));
    }

    #[test]
    fn negative_coefficients_are_flipped() {
        let sys = DiophantineSystem::from_i64(&[&[1, -1]], &[0], Some(&[6, 6])).unwrap();
        let agg = aggregate_bounded(&sys).unwrap();
        let e = KnapsackEquation::from_aggregation(&sys, &agg).unwrap();
        assert_eq!(e, eq(&[1, 1], 6, Some(&[6, 6])));
        assert_eq!(count_dp(&e).unwrap().count, BigInt::from(7));
    }

    #[test]
    fn system_counts() {
        let limits = CountLimits::default();
        let sys = DiophantineSystem::from_i64(&[&[1, 2], &[2, 1]], &[3, 3], Some(&[3, 3])).unwrap();
        let c = count_solutions(&sys, MethodChoice::Both, &limits).unwrap();
        assert_eq!(c.count, Some(BigInt::one()));
        assert_eq!(c.methods_agree(), Some(true));

        let sys = DiophantineSystem::from_i64(&[&[2, 4]], &[3], None).unwrap();
        let c = count_solutions(&sys, MethodChoice::Both, &limits).unwrap();
        assert_eq!(c.count, Some(BigInt::zero()));
        assert!(!c.feasible);

        let sys = DiophantineSystem::from_i64(&[&[1, -1]], &[0], None).unwrap();
        let c = count_solutions(&sys, MethodChoice::Both, &limits).unwrap();
        assert!(c.feasible);
        assert_eq!(c.count, None);

        let sys = DiophantineSystem::from_i64(&[&[1, -1]], &[3], None).unwrap();
        assert!(
            count_solutions(&sys, MethodChoice::Dp, &limits)
                .unwrap()
                .feasible
        );
    }

    #[test]
    fn pointed_unbounded_count() {
        let limits = CountLimits::default();
        let sys = DiophantineSystem::from_i64(&[&[1, 2], &[2, 1]], &[3, 3], None).unwrap();
        let c = count_solutions(&sys, MethodChoice::Both, &limits).unwrap();
        assert_eq!(c.count, Some(BigInt::one()));
        // the aggregated right-hand side is far above the spectral cap
        assert!(c.spectral.is_none());
    }

    #[test]
    fn coefficients_sum_to_box_size() {
        let c = bounded_coefficients(
            &eq(&[2, 3, 0], 0, Some(&[2, 1, 3])),
            &CountLimits::default(),
        )
        .unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.iter().sum::<BigUint>(), BigUint::from(24u32));
        assert_eq!(c[3], BigUint::from(4u32));
    }

    #[test]
    fn content_of_coefficients() {
        assert_eq!(content(&eq(&[4, 6], 3, None)), BigInt::from(2));
    }
}

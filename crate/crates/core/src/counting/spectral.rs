//! Coefficient extraction by sampling the generating function on a circle.
//!
//! For a polynomial `P` of degree `D < N` the discrete Fourier inversion
//! `[X^beta] P = (1/N) sum_k P(w^k) w^(-k beta)`, `w = e^(2 pi i / N)`, is
//! exact. The unbounded series `Q` is sampled on the circle of radius 1/2,
//! where the inversion picks up the aliased tail
//! `sum_{t>=1} [X^(beta+tN)] Q 2^(-tN)`, which shrinks as `N` grows.

use std::f64::consts::PI;

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{CountLimits, CountMethod, CountResult, KnapsackEquation};
use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

fn to_u64(v: &BigInt, cap: u64) -> Result<u64> {
    match v.to_u64() {
        Some(x) if x <= cap => Ok(x),
        _ => Err(Error::DegreeOverflow {
            degree: v.to_string(),
            cap,
        }),
    }
}

fn zero_result(method: CountMethod) -> CountResult {
    CountResult {
        count: BigInt::zero(),
        method,
        estimate: Some(0.0),
        error_bound: Some(0.0),
        samples: Some(0),
    }
}

pub fn count_spectral_bounded(eq: &KnapsackEquation) -> Result<CountResult> {
    count_spectral_bounded_with(eq, &CountLimits::default())
}

/// Bounded count from `N = max(D, beta) + 1` samples of `P` in `f64`.
///
/// The returned error bound covers the floating-point evaluation of the
/// partial geometric sums, their product and the final average.
pub fn count_spectral_bounded_with(
    eq: &KnapsackEquation,
    limits: &CountLimits,
) -> Result<CountResult> {
    eq.check_nonnegative()?;
    let u = eq
        .bounds
        .as_ref()
        .ok_or_else(|| Error::UnsupportedRegime("bounded evaluator needs bounds".into()))?;
    let degree = eq.degree().expect("bounded");
    if eq.beta.is_negative() || eq.beta > degree {
        return Ok(zero_result(CountMethod::Spectral));
    }
    let cap = limits.spectral_max_samples.saturating_sub(1);
    let n_samples = to_u64(&degree.clone().max(eq.beta.clone()), cap)? + 1;
    let n = n_samples as usize;
    let beta = eq.beta.to_u64().expect("checked") % n_samples;
    let alpha: Vec<u64> = eq
        .alpha
        .iter()
        .map(|a| (a % BigInt::from(n_samples)).to_u64().expect("reduced"))
        .collect();
    let u: Vec<u64> = u.iter().map(|x| to_u64(x, cap)).collect::<Result<_>>()?;

    let twiddle: Vec<Complex64> = (0..n)
        .map(|t| Complex64::from_polar(1.0, 2.0 * PI * t as f64 / n as f64))
        .collect();
    let mut total = Complex64::zero();
    for k in 0..n_samples {
        let mut value = Complex64::new(1.0, 0.0);
        for (&a, &ul) in alpha.iter().zip(&u) {
            let step = (a * k) % n_samples;
            let mut idx = 0u64;
            let mut partial = Complex64::zero();
            for _ in 0..=ul {
                partial += twiddle[idx as usize];
                idx = (idx + step) % n_samples;
            }
            value *= partial;
        }
        let back = (n_samples - (beta * k) % n_samples) % n_samples;
        total += value * twiddle[back as usize];
    }
    let estimate = total.re / n as f64;

    let s: f64 = u.iter().map(|&x| (x + 1) as f64).product();
    let sq: f64 = u.iter().map(|&x| ((x + 1) * (x + 1)) as f64).sum();
    let eps = f64::EPSILON / 2.0;
    let bound = 4.0 * eps * s * (sq + 4.0 * u.len() as f64 + n as f64 + 8.0);
    if bound.is_nan() || bound >= 0.5 {
        return Err(Error::PrecisionLoss { bound });
    }
    let rounded = estimate.round();
    let count = BigInt::from(rounded.max(0.0) as u128);
    Ok(CountResult {
        count,
        method: CountMethod::Spectral,
        estimate: Some(estimate),
        error_bound: Some(bound),
        samples: Some(n),
    })
}

/// `sum_{t>=1} (beta + tN + 1)^(n-1) 2^(-tN)`, bounding the aliased tail
/// since `[X^d] Q <= (d+1)^(n-1)` when every coefficient is positive.
pub fn alias_bound(beta: u64, samples: u64, vars: usize) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    for t in 1u64.. {
        let d = (beta + t * samples + 1) as f64;
        let log2 = (vars.saturating_sub(1)) as f64 * d.log2() - (t * samples) as f64;
        let term = log2.exp2();
        sum += term;
        if term < 1e-30 * sum.max(1e-300) && term < prev || t > 1_000_000 {
            break;
        }
        prev = term;
    }
    sum
}

pub fn count_spectral_unbounded(eq: &KnapsackEquation) -> Result<CountResult> {
    count_spectral_unbounded_with(eq, &CountLimits::default())
}

/// Unbounded count from samples of `Q` on the circle of radius 1/2.
///
/// The estimate is rescaled by `2^beta`, so the working precision grows with
/// `beta`. `N` doubles until the alias bound drops below 1/4 and two
/// successive estimates round to the same integer.
pub fn count_spectral_unbounded_with(
    eq: &KnapsackEquation,
    limits: &CountLimits,
) -> Result<CountResult> {
    if let Some(index) = eq.alpha.iter().position(|a| !a.is_positive()) {
        return Err(Error::NonPositiveCoefficient { index });
    }
    if eq.beta.is_negative() {
        return Ok(zero_result(CountMethod::Spectral));
    }
    let beta = to_u64(&eq.beta, limits.unbounded_max_rhs)?;
    let alpha: Vec<u64> = eq
        .alpha
        .iter()
        .map(|a| a.to_u64().unwrap_or(u64::MAX))
        .collect();
    let vars = alpha.len();
    let mut samples = (beta + 1).next_power_of_two().max(8);
    let mut previous: Option<BigInt> = None;
    let mut consts = Consts::new().map_err(|_| Error::PrecisionLoss { bound: f64::NAN })?;
    loop {
        if samples > limits.spectral_max_samples {
            return Err(Error::DegreeOverflow {
                degree: samples.to_string(),
                cap: limits.spectral_max_samples,
            });
        }
        let alias = alias_bound(beta, samples, vars);
        if alias < 0.25 {
            let eval = evaluate_unbounded(&alpha, beta, samples, &mut consts);
            let bound = alias + eval.rounding_bound;
            if bound.is_nan() || bound >= 0.5 {
                return Err(Error::PrecisionLoss { bound });
            }
            if previous.as_ref() == Some(&eval.rounded) {
                return Ok(CountResult {
                    count: eval.rounded,
                    method: CountMethod::Spectral,
                    estimate: Some(eval.estimate),
                    error_bound: Some(bound),
                    samples: Some(samples as usize),
                });
            }
            previous = Some(eval.rounded);
        }
        samples *= 2;
    }
}

struct UnboundedEval {
    rounded: BigInt,
    estimate: f64,
    rounding_bound: f64,
}

#[derive(Clone)]
struct Cx {
    re: BigFloat,
    im: BigFloat,
}

impl Cx {
    fn mul(&self, o: &Cx, p: usize) -> Cx {
        let rr = self.re.mul(&o.re, p, RM);
        let ii = self.im.mul(&o.im, p, RM);
        let ri = self.re.mul(&o.im, p, RM);
        let ir = self.im.mul(&o.re, p, RM);
        Cx {
            re: rr.sub(&ii, p, RM),
            im: ri.add(&ir, p, RM),
        }
    }

    fn conj(&self) -> Cx {
        Cx {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    /// `1 / (1 - self)`.
    fn one_minus_recip(&self, p: usize) -> Cx {
        let one = BigFloat::from_word(1, p);
        let a = one.sub(&self.re, p, RM);
        let b = self.im.neg();
        let norm = a.mul(&a, p, RM).add(&b.mul(&b, p, RM), p, RM);
        Cx {
            re: a.div(&norm, p, RM),
            im: b.neg().div(&norm, p, RM),
        }
    }

    fn scale_pow2(&self, exp: i64) -> Cx {
        Cx {
            re: shift(&self.re, exp),
            im: shift(&self.im, exp),
        }
    }
}

fn shift(x: &BigFloat, exp: i64) -> BigFloat {
    match x.exponent() {
        Some(e) if !x.is_zero() => {
            let mut y = x.clone();
            y.set_exponent((e as i64 + exp) as i32);
            y
        }
        _ => x.clone(),
    }
}

fn evaluate_unbounded(alpha: &[u64], beta: u64, samples: u64, cc: &mut Consts) -> UnboundedEval {
    let n = alpha.len();
    let log_n = 64 - samples.leading_zeros() as usize;
    let p = (beta as usize + 64 + 2 * log_n + 8 * n).div_ceil(64) * 64;

    let angle = cc
        .pi(p + 64, RM)
        .mul(&BigFloat::from_word(2, p + 64), p + 64, RM)
        .div(&BigFloat::from_u64(samples, p + 64), p + 64, RM);
    let root = Cx {
        re: angle.cos(p, RM, cc),
        im: angle.sin(p, RM, cc),
    };
    let mut twiddle = Vec::with_capacity(samples as usize);
    let mut cur = Cx {
        re: BigFloat::from_word(1, p),
        im: BigFloat::from_word(0, p),
    };
    for _ in 0..samples {
        twiddle.push(cur.clone());
        cur = cur.mul(&root, p);
    }

    let mut sum = BigFloat::from_word(0, p);
    for k in 0..samples {
        let mut g = Cx {
            re: BigFloat::from_word(1, p),
            im: BigFloat::from_word(0, p),
        };
        for &a in alpha {
            let idx = ((a as u128 * k as u128) % samples as u128) as usize;
            let w = twiddle[idx].scale_pow2(-(a.min(1 << 30) as i64));
            g = g.mul(&w.one_minus_recip(p), p);
        }
        let back = ((beta as u128 * k as u128) % samples as u128) as usize;
        let term = g.mul(&twiddle[back].conj(), p);
        sum = sum.add(&term.re, p, RM);
    }
    let mean = sum.div(&BigFloat::from_u64(samples, p), p, RM);
    let scaled = shift(&mean, beta as i64);

    let half = shift(&BigFloat::from_word(1, p), -1);
    let rounded = floor_to_bigint(&scaled.add(&half, p, RM));

    let log2_g: f64 = alpha
        .iter()
        .map(|&a| -(1.0 - (-(a.min(1024) as f64)).exp2()).log2())
        .sum();
    let ops = n as f64 * (6.0 * samples as f64 + 10.0) + 4.0 * samples as f64 + 10.0;
    let rounding_bound = (1.0 + log2_g + ops.log2() + beta as f64 - p as f64).exp2();
    UnboundedEval {
        rounded: rounded.max(BigInt::zero()),
        estimate: to_f64(&scaled),
        rounding_bound,
    }
}

/// Splits a finite value into `(sign, mantissa, exponent)` with value
/// `mantissa * 2^exponent`.
fn raw(x: &BigFloat) -> Option<(Sign, BigUint, i64)> {
    let (words, _, sign, e, _) = x.as_raw_parts()?;
    let bytes: Vec<u8> = words.iter().flat_map(|w: &Word| w.to_le_bytes()).collect();
    let m = BigUint::from_bytes_le(&bytes);
    Some((sign, m, e as i64 - (Word::BITS as i64) * words.len() as i64))
}

fn floor_to_bigint(x: &BigFloat) -> BigInt {
    let Some((sign, m, exp)) = raw(x) else {
        return BigInt::zero();
    };
    let neg = sign == Sign::Neg;
    let mag = if exp >= 0 {
        BigInt::from(m << exp as usize)
    } else {
        let sh = (-exp) as u64;
        let q = &m >> sh;
        let exact = (&q << sh) == m;
        let q = BigInt::from(q);
        if neg && !exact {
            return -(q + BigInt::from(1));
        }
        q
    };
    if neg {
        -mag
    } else {
        mag
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    let Some((sign, m, exp)) = raw(x) else {
        return 0.0;
    };
    let bits = m.bits() as i64;
    let drop = (bits - 64).max(0);
    let top = (&m >> drop as u64).to_u64().unwrap_or(0) as f64;
    let v = top * ((exp + drop) as f64).exp2();
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::count_dp;

    fn eq(alpha: &[i64], beta: i64, u: Option<&[i64]>) -> KnapsackEquation {
        KnapsackEquation::from_i64(alpha, beta, u).unwrap()
    }

    #[test]
    fn bounded_examples() {
        let r = count_spectral_bounded(&eq(&[3, 3], 6, Some(&[2, 2]))).unwrap();
        assert_eq!(r.count, BigInt::from(3));
        assert!((r.estimate.unwrap() - 3.0).abs() < r.error_bound.unwrap());
        let r = count_spectral_bounded(&eq(&[1], 7, Some(&[5]))).unwrap();
        assert_eq!(r.count, BigInt::zero());
        let r = count_spectral_bounded(&eq(&[1, 18], 19, Some(&[3, 3]))).unwrap();
        assert_eq!(r.count, BigInt::from(1));
        let r = count_spectral_bounded(&eq(&[0, 2], 4, Some(&[3, 2]))).unwrap();
        assert_eq!(r.count, BigInt::from(4));
    }

    #[test]
    fn unbounded_examples() {
        for (a, b, want) in [
            (&[5i64, 4][..], 9, 1),
            (&[1, 2], 4, 3),
            (&[1], 0, 1),
            (&[2], 1, 0),
            (&[1, 1, 1], 10, 66),
        ] {
            let r = count_spectral_unbounded(&eq(a, b, None)).unwrap();
            assert_eq!(r.count, BigInt::from(want), "{a:?} {b}");
            assert!(r.error_bound.unwrap() < 0.5);
        }
    }

    #[test]
    fn unbounded_matches_dp_at_larger_rhs() {
        let e = eq(&[3, 5, 7], 200, None);
        let s = count_spectral_unbounded(&e).unwrap();
        assert_eq!(s.count, count_dp(&e).unwrap().count);
    }

    #[test]
    fn unbounded_rejects_zero_coefficient() {
        assert_eq!(
            count_spectral_unbounded(&eq(&[0, 1], 2, None)),
            Err(Error::NonPositiveCoefficient { index: 0 })
        );
    }

    #[test]
    fn alias_bound_decreases() {
        assert!(alias_bound(10, 64, 3) < alias_bound(10, 16, 3));
        assert!(alias_bound(10, 64, 3) < 1e-10);
    }

    #[test]
    fn raw_conversion() {
        let x = BigFloat::from_f64(-2.5, 128);
        assert_eq!(floor_to_bigint(&x), BigInt::from(-3));
        assert_eq!(to_f64(&x), -2.5);
        let y = BigFloat::from_f64(5.5e20, 128);
        assert_eq!(
            floor_to_bigint(&y),
            BigInt::from(550_000_000_000_000_000_000u128)
        );
    }
}

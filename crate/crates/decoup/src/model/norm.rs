//! Norms on R^d, with exact threshold comparisons.
//!
//! Tail checks compare `‖v‖ >= t` where the probability bookkeeping is exact
//! rational arithmetic. To keep the *indicator* exact as well, each norm gets a
//! monotone rational key: the absolute/supremum norms use max |coordinate|,
//! the Euclidean norm uses the sum of squares (compared against t^2), and
//! integer p-norms use the sum of |coordinate|^p. Every finite f64 is itself a
//! rational, so these keys are exact functions of the stored coordinates.
//! Non-integer p-norms fall back to the computed f64 norm value as the key,
//! which is still deterministic but carries one rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::value::VectorValue;

/// Which norm ‖·‖ the experiment runs under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormSpec {
    /// |x| on R^1 only.
    Absolute,
    /// Euclidean length.
    Euclidean,
    /// max |x_i|.
    Supremum,
    /// (Σ |x_i|^p)^{1/p}, p >= 1.
    PNorm { p: f64 },
}

impl NormSpec {
    pub fn validate(&self) -> Result<()> {
        if let NormSpec::PNorm { p } = self {
            if !(*p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidPNorm { p: *p });
            }
        }
        Ok(())
    }

    fn integer_p(&self) -> Option<i32> {
        match self {
            NormSpec::PNorm { p } if p.fract() == 0.0 && *p >= 1.0 && *p <= 64.0 => {
                Some(*p as i32)
            }
            _ => None,
        }
    }
}

/// The norm of `v` under `norm`, as an f64.
pub fn norm_of(v: &VectorValue, norm: &NormSpec) -> Result<f64> {
    norm.validate()?;
    let c = v.coords();
    match norm {
        NormSpec::Absolute => {
            if v.dim() != 1 {
                return Err(Error::AbsoluteNormDim { got: v.dim() });
            }
            Ok(c[0].abs())
        }
        NormSpec::Euclidean => Ok(c.iter().map(|x| x * x).sum::<f64>().sqrt()),
        NormSpec::Supremum => Ok(c.iter().fold(0.0, |m, x| m.max(x.abs()))),
        NormSpec::PNorm { p } => Ok(c.iter().map(|x| x.abs().powf(*p)).sum::<f64>().powf(1.0 / p)),
    }
}

/// Exact rational representation of a finite f64.
pub(crate) fn rational_of(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite f64 converts exactly to a rational")
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    let numer = r.numer();
    let denom = r.denom();
    // Good enough for reporting; internal comparisons never round-trip.
    let nf = bigint_to_f64(numer);
    let df = bigint_to_f64(denom);
    nf / df
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    b.to_f64().unwrap_or(f64::INFINITY)
}

/// Monotone rational key for a norm value, used for exact tail indicators.
/// `None` means the norm has no exact key (non-integer p).
pub(crate) fn norm_key(v: &VectorValue, norm: &NormSpec) -> Result<Option<BigRational>> {
    let c = v.coords();
    match norm {
        NormSpec::Absolute => {
            if v.dim() != 1 {
                return Err(Error::AbsoluteNormDim { got: v.dim() });
            }
            Ok(Some(rational_of(c[0]).abs()))
        }
        NormSpec::Supremum => {
            let mut key = BigRational::zero();
            for &x in c {
                let r = rational_of(x).abs();
                if r > key {
                    key = r;
                }
            }
            Ok(Some(key))
        }
        NormSpec::Euclidean => {
            let mut key = BigRational::zero();
            for &x in c {
                let r = rational_of(x);
                key += &r * &r;
            }
            Ok(Some(key))
        }
        NormSpec::PNorm { .. } => match norm.integer_p() {
            Some(p) => {
                let mut key = BigRational::zero();
                for &x in c {
                    key += rational_of(x).abs().pow(p);
                }
                Ok(Some(key))
            }
            None => Ok(None),
        },
    }
}

/// The key a threshold `t >= 0` maps to, matching `norm_key`'s scale.
pub(crate) fn threshold_key(t: f64, norm: &NormSpec) -> Option<BigRational> {
    debug_assert!(t >= 0.0);
    let r = rational_of(t);
    match norm {
        NormSpec::Absolute | NormSpec::Supremum => Some(r),
        NormSpec::Euclidean => Some(&r * &r),
        NormSpec::PNorm { .. } => norm.integer_p().map(|p| r.pow(p)),
    }
}

/// Exact indicator `‖v‖ >= t` (falls back to f64 for non-integer p-norms).
pub fn norm_ge_threshold(v: &VectorValue, norm: &NormSpec, t: f64) -> Result<bool> {
    if t <= 0.0 {
        return Ok(true); // norms are nonnegative
    }
    match norm_key(v, norm)? {
        Some(key) => {
            let tk = threshold_key(t, norm).expect("key and threshold transforms agree");
            Ok(key >= tk)
        }
        None => Ok(norm_of(v, norm)? >= t),
    }
}

/// Exact comparison `‖v‖ >= ‖w‖` (same fallback rule).
pub fn norm_ge_norm(v: &VectorValue, w: &VectorValue, norm: &NormSpec) -> Result<bool> {
    match (norm_key(v, norm)?, norm_key(w, norm)?) {
        (Some(a), Some(b)) => Ok(a >= b),
        _ => Ok(norm_of(v, norm)? >= norm_of(w, norm)?),
    }
}

/// Exact rational `t/divisor` for thresholds like t/3 or 2t/3.
pub(crate) fn scaled_threshold_key(
    t: f64,
    numer: u32,
    denom: u32,
    norm: &NormSpec,
) -> Option<BigRational> {
    let scaled =
        rational_of(t) * BigRational::new(BigInt::from(numer), BigInt::from(denom));
    if scaled <= BigRational::zero() {
        return Some(BigRational::zero()); // caller treats key<=0 as tail 1
    }
    match norm {
        NormSpec::Absolute | NormSpec::Supremum => Some(scaled),
        NormSpec::Euclidean => Some(&scaled * &scaled),
        NormSpec::PNorm { .. } => norm.integer_p().map(|p| scaled.pow(p)),
    }
}

pub(crate) fn one() -> BigRational {
    BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn v(coords: &[f64]) -> VectorValue {
        VectorValue::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_of(&v(&[3.0, -4.0]), &NormSpec::Euclidean).unwrap(), 5.0);
        assert_eq!(norm_of(&v(&[0.0, 0.0, 0.0]), &NormSpec::Supremum).unwrap(), 0.0);
        assert_eq!(norm_of(&v(&[0.0, 0.0, 0.0]), &NormSpec::Euclidean).unwrap(), 0.0);
        assert_eq!(norm_of(&v(&[1.0, -7.0, 2.0]), &NormSpec::Supremum).unwrap(), 7.0);
    }

    #[test]
    fn absolute_norm_rejects_higher_dim() {
        assert!(norm_of(&v(&[1.0, 2.0]), &NormSpec::Absolute).is_err());
        assert_eq!(norm_of(&v(&[-3.5]), &NormSpec::Absolute).unwrap(), 3.5);
    }

    #[test]
    fn pnorm_requires_p_at_least_one() {
        assert!(norm_of(&v(&[1.0]), &NormSpec::PNorm { p: 0.5 }).is_err());
        let three = norm_of(&v(&[1.0, 1.0, 1.0]), &NormSpec::PNorm { p: 3.0 }).unwrap();
        assert!((three - 3f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn exact_indicator_matches_float_on_safe_cases() {
        let val = v(&[3.0, -4.0]);
        assert!(norm_ge_threshold(&val, &NormSpec::Euclidean, 5.0).unwrap());
        assert!(!norm_ge_threshold(&val, &NormSpec::Euclidean, 5.000000001).unwrap());
        assert!(norm_ge_threshold(&val, &NormSpec::Euclidean, 0.0).unwrap());
        assert!(norm_ge_threshold(&val, &NormSpec::Euclidean, -1.0).unwrap());
    }

    #[test]
    fn norm_ge_norm_is_exact_on_euclidean_ties() {
        // ‖(3,4)‖ == ‖(5,0)‖ == 5 exactly in the squared key.
        assert!(norm_ge_norm(&v(&[3.0, 4.0]), &v(&[5.0, 0.0]), &NormSpec::Euclidean).unwrap());
        assert!(norm_ge_norm(&v(&[5.0, 0.0]), &v(&[3.0, 4.0]), &NormSpec::Euclidean).unwrap());
    }

    /// Norm axioms on 10^4 random pairs, 1e-9 relative tolerance.
    #[test]
    fn norm_axioms_hold_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(07_1994);
        let norms = [
            NormSpec::Euclidean,
            NormSpec::Supremum,
            NormSpec::PNorm { p: 3.0 },
            NormSpec::PNorm { p: 1.5 },
        ];
        for trial in 0..10_000 {
            let norm = &norms[trial % norms.len()];
            let d = rng.gen_range(1..=5);
            let a = v(&(0..d).map(|_| rng.gen_range(-10.0..10.0)).collect::<Vec<_>>());
            let b = v(&(0..d).map(|_| rng.gen_range(-10.0..10.0)).collect::<Vec<_>>());
            let lambda: f64 = rng.gen_range(-4.0..4.0);

            let na = norm_of(&a, norm).unwrap();
            let nb = norm_of(&b, norm).unwrap();
            let nab = norm_of(&a.add(&b).unwrap(), norm).unwrap();
            let nla = norm_of(&a.scale(lambda), norm).unwrap();

            assert!(na >= 0.0);
            let scale = 1f64.max(na).max(nb);
            assert!(nab <= na + nb + 1e-9 * scale, "triangle inequality: {norm:?}");
            assert!(
                (nla - lambda.abs() * na).abs() <= 1e-9 * scale.max(nla),
                "homogeneity: {norm:?}"
            );
        }
    }

    #[test]
    fn zero_iff_zero_vector() {
        for norm in [NormSpec::Euclidean, NormSpec::Supremum, NormSpec::PNorm { p: 2.5 }] {
            assert_eq!(norm_of(&VectorValue::zero(3), &norm).unwrap(), 0.0);
            assert!(norm_of(&v(&[0.0, 1e-30, 0.0]), &norm).unwrap() > 0.0);
        }
    }
}

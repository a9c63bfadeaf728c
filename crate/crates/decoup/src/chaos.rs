//! Rademacher chaos of degree <= 2: exact moments over sign patterns,
//! hypercontractivity ratios, the moment-ratio constant kappa, and the
//! anti-concentration lower bound for shifted chaos.
//!
//! A chaos form is x + sum_i a_i eps_i + sum_{i != j} b_ij eps_i eps_j with
//! b_ii = 0 and coefficients in R^d. For n within the pattern cap every
//! quantity here is an exact average over all 2^n equiprobable sign vectors.
//! For scalar integer coefficients the moment sums are also kept as big
//! integers, which makes the Hoelder interpolation check
//! E xi^2 <= (E|xi|)^(2/3) (E xi^4)^(1/3) a pure integer comparison:
//! cubing both sides clears the roots and the 2^n denominators cancel.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::norm::{norm_of, norm_ge_norm, rational_of, rational_to_f64, NormSpec};
use crate::model::value::{Point, SignVector, VectorValue};
use crate::model::DistributionSpec;
use crate::problab::{clopper_pearson, McParams};

/// Largest n enumerated exactly (2^n patterns); beyond it the checks demand
/// an explicit sampling fallback.
pub const DEFAULT_PATTERN_CAP: usize = 16;

/// x + sum a_i eps_i + sum_{i != j} b_ij eps_i eps_j.
#[derive(Debug, Clone)]
pub struct ChaosForm {
    x: VectorValue,
    a: Vec<VectorValue>,
    /// Row-major n x n, zero diagonal.
    b: Vec<Vec<VectorValue>>,
}

impl ChaosForm {
    pub fn new(x: VectorValue, a: Vec<VectorValue>, b: Vec<Vec<VectorValue>>) -> Result<ChaosForm> {
        let n = a.len();
        let dim = x.dim();
        for v in &a {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
            }
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        for (i, row) in b.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, v) in row.iter().enumerate() {
                if v.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
                }
                if i == j && v.coords().iter().any(|&c| c != 0.0) {
                    return Err(Error::Config(format!(
                        "chaos quadratic coefficients need b[{i}][{i}] = 0"
                    )));
                }
            }
        }
        Ok(ChaosForm { x, a, b })
    }

    /// Scalar form from plain numbers; the common case in tests and corpora.
    pub fn scalar(x: f64, a: &[f64], b: &[Vec<f64>]) -> Result<ChaosForm> {
        let av = a.iter().map(|&v| VectorValue::scalar(v)).collect::<Result<Vec<_>>>()?;
        let bv = b
            .iter()
            .map(|row| row.iter().map(|&v| VectorValue::scalar(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        ChaosForm::new(VectorValue::scalar(x)?, av, bv)
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    pub fn constant_term(&self) -> &VectorValue {
        &self.x
    }

    /// True when every coefficient is integer-valued (exact moment path).
    pub fn is_integral(&self) -> bool {
        self.x.is_integral()
            && self.a.iter().all(VectorValue::is_integral)
            && self.b.iter().flatten().all(VectorValue::is_integral)
    }
}

/// Evaluate the form at one sign vector. Exact for integer coefficients.
pub fn chaos_eval(form: &ChaosForm, eps: &SignVector) -> Result<VectorValue> {
    if eps.len() != form.n() {
        return Err(Error::DimensionMismatch { expected: form.n(), got: eps.len() });
    }
    let signs = eps.signs();
    let mut out = form.x.clone();
    for (i, ai) in form.a.iter().enumerate() {
        out.add_assign(&ai.scale(signs[i] as f64))?;
    }
    for i in 0..form.n() {
        for j in 0..form.n() {
            if i == j {
                continue;
            }
            out.add_assign(&form.b[i][j].scale((signs[i] * signs[j]) as f64))?;
        }
    }
    Ok(out)
}

fn check_pattern_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { needed: 1u128 << n, cap: 1u128 << cap });
    }
    if n >= 64 {
        return Err(Error::CapExceeded { needed: u128::MAX, cap: 1u128 << cap });
    }
    Ok(())
}

fn for_each_pattern(n: usize, mut f: impl FnMut(&SignVector) -> Result<()>) -> Result<()> {
    for mask in 0u64..(1u64 << n) {
        f(&SignVector::from_mask(mask, n))?;
    }
    Ok(())
}

/// Exact integer moment sums for scalar integral forms: sums over all
/// patterns of |xi|, xi^2, xi^4.
#[derive(Debug, Clone)]
pub struct ExactMomentSums {
    pub s1: BigInt,
    pub s2: BigInt,
    pub s4: BigInt,
}

/// L1, L2, L4 of ‖chaos‖ over all 2^n sign patterns.
#[derive(Debug, Clone)]
pub struct ChaosMoments {
    pub l1: f64,
    pub l2: f64,
    pub l4: f64,
    pub patterns: u64,
    pub exact: Option<ExactMomentSums>,
}

/// Exact moments by full pattern enumeration (n <= cap).
pub fn chaos_exact_moments(form: &ChaosForm, norm: &NormSpec, cap: usize) -> Result<ChaosMoments> {
    check_pattern_cap(form.n(), cap)?;
    let n = form.n();
    let patterns = 1u64 << n;
    let exact_path = form.dim() == 1 && *norm == NormSpec::Absolute && form.is_integral();

    let mut sum1 = 0.0f64;
    let mut sum2 = 0.0f64;
    let mut sum4 = 0.0f64;
    let mut s1 = BigInt::zero();
    let mut s2 = BigInt::zero();
    let mut s4 = BigInt::zero();

    for_each_pattern(n, |eps| {
        let value = chaos_eval(form, eps)?;
        let nv = norm_of(&value, norm)?;
        sum1 += nv;
        sum2 += nv * nv;
        sum4 += nv * nv * nv * nv;
        if exact_path {
            let m = BigInt::from_f64(nv).expect("integral norm value");
            s1 += &m;
            s2 += &m * &m;
            s4 += (&m * &m) * (&m * &m);
        }
        Ok(())
    })?;

    let count = patterns as f64;
    Ok(ChaosMoments {
        l1: sum1 / count,
        l2: (sum2 / count).sqrt(),
        l4: (sum4 / count).powf(0.25),
        patterns,
        exact: exact_path.then_some(ExactMomentSums { s1, s2, s4 }),
    })
}

/// Hypercontractivity and interpolation report for one chaos instance.
///
/// `holds_l4` checks the degree-2 working constant L4 <= 3 L2; `holds_l1`
/// checks the implied L2 <= 9 L1. `interpolation_holds` checks the
/// unconditional Hoelder inequality E xi^2 <= (E|xi|)^(2/3) (E xi^4)^(1/3),
/// exactly on integral scalar instances.
#[derive(Debug, Clone, Serialize)]
pub struct HyperReport {
    pub l4_over_l2: f64,
    pub l2_over_l1: f64,
    pub holds_l4: bool,
    pub holds_l1: bool,
    pub interpolation_holds: bool,
    pub interpolation_exact: bool,
    pub patterns: u64,
}

/// Working constant for L4/L2 on degree-2 chaos.
pub const WORKING_L4_L2: f64 = 3.0;

pub fn hypercontractivity_report(
    form: &ChaosForm,
    norm: &NormSpec,
    cap: usize,
) -> Result<HyperReport> {
    let moments = chaos_exact_moments(form, norm, cap)?;
    let patterns = BigInt::from(moments.patterns);

    let (holds_l4, holds_l1, interpolation_holds, interpolation_exact) = match &moments.exact {
        Some(sums) => {
            // L4 <= 3 L2  <=>  S4 * 2^n <= 81 * S2^2
            let holds_l4 = &sums.s4 * &patterns <= 81 * (&sums.s2 * &sums.s2);
            // L2 <= 9 L1  <=>  S2 * 2^n <= 81 * S1^2
            let holds_l1 = &sums.s2 * &patterns <= 81 * (&sums.s1 * &sums.s1);
            // E xi^2 <= (E|xi|)^(2/3) (E xi^4)^(1/3)  <=>  S2^3 <= S1^2 S4
            let interp = (&sums.s2 * &sums.s2 * &sums.s2) <= (&sums.s1 * &sums.s1 * &sums.s4);
            (holds_l4, holds_l1, interp, true)
        }
        None => {
            let holds_l4 = moments.l4 <= WORKING_L4_L2 * moments.l2;
            let holds_l1 = moments.l2 <= WORKING_L4_L2.powi(2) * moments.l1;
            let e1 = moments.l1;
            let e2 = moments.l2 * moments.l2;
            let e4 = moments.l4.powi(4);
            let interp = e2.powi(3) <= e1 * e1 * e4 * (1.0 + 1e-9);
            (holds_l4, holds_l1, interp, false)
        }
    };

    let ratio = |a: f64, b: f64| if b == 0.0 { 1.0 } else { a / b };
    Ok(HyperReport {
        l4_over_l2: ratio(moments.l4, moments.l2),
        l2_over_l1: ratio(moments.l2, moments.l1),
        holds_l4,
        holds_l1,
        interpolation_holds,
        interpolation_exact,
        patterns: moments.patterns,
    })
}

/// The anti-concentration probability p = P(‖chaos‖ >= ‖x‖) and the implied
/// per-instance constant 1/p.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma2Report {
    pub p: f64,
    pub measured_c: f64,
    pub patterns_or_replicates: u64,
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<[f64; 2]>,
}

/// Exact anti-concentration check over all 2^n sign patterns.
pub fn lemma2_check(form: &ChaosForm, norm: &NormSpec, cap: usize) -> Result<Lemma2Report> {
    check_pattern_cap(form.n(), cap)?;
    let n = form.n();
    let patterns = 1u64 << n;
    let mut hits = 0u64;
    for_each_pattern(n, |eps| {
        let value = chaos_eval(form, eps)?;
        if norm_ge_norm(&value, &form.x, norm)? {
            hits += 1;
        }
        Ok(())
    })?;
    let p = hits as f64 / patterns as f64; // dyadic, exact in f64
    Ok(Lemma2Report {
        p,
        measured_c: if p > 0.0 { 1.0 / p } else { f64::INFINITY },
        patterns_or_replicates: patterns,
        exact: true,
        ci: None,
    })
}

/// Sampling fallback for n beyond the enumeration cap, with a
/// Clopper-Pearson interval and an explicit approximate flag.
pub fn lemma2_check_sampled(
    form: &ChaosForm,
    norm: &NormSpec,
    params: &McParams,
) -> Result<Lemma2Report> {
    params.validate()?;
    let n = form.n();
    if n >= 64 {
        return Err(Error::Config("sampled chaos check supports n < 64".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mask_bits: u64 = if n == 63 { u64::MAX >> 1 } else { (1u64 << n) - 1 };
    let mut hits = 0u64;
    for _ in 0..params.replicates {
        let mask = rng.gen::<u64>() & mask_bits;
        let value = chaos_eval(form, &SignVector::from_mask(mask, n))?;
        if norm_ge_norm(&value, &form.x, norm)? {
            hits += 1;
        }
    }
    let p = hits as f64 / params.replicates as f64;
    let (lo, hi) = clopper_pearson(hits, params.replicates, params.confidence);
    Ok(Lemma2Report {
        p,
        measured_c: if p > 0.0 { 1.0 / p } else { f64::INFINITY },
        patterns_or_replicates: params.replicates,
        exact: false,
        ci: Some([lo, hi]),
    })
}

/// kappa = inf over unit functionals of (E|x'(Y)|)^2 / E(x'(Y))^2.
#[derive(Debug, Clone, Serialize)]
pub struct KappaEstimate {
    pub kappa: f64,
    /// True when kappa is the exact d = 1 value; false for the direction
    /// sweep, which only upper-bounds the infimum.
    pub exact: bool,
    pub directions_tried: usize,
    #[serde(skip)]
    pub(crate) rational: Option<BigRational>,
}

/// Mean-zero check with exact rational atom arithmetic, tolerance 1e-10.
fn require_mean_zero(support: &crate::model::FiniteSupport) -> Result<Vec<Vec<BigRational>>> {
    let mut coords: Vec<Vec<BigRational>> = Vec::with_capacity(support.len());
    let dim = match support.atom(0) {
        Point::Real(v) => v.len(),
        Point::Label(_) => {
            return Err(Error::KernelDomain(
                "kappa needs real-vector atoms, got labels".into(),
            ))
        }
    };
    let mut mean = vec![BigRational::zero(); dim];
    for i in 0..support.len() {
        let v = support.atom(i).as_real()?;
        let rational: Vec<BigRational> = v.iter().map(|&c| rational_of(c)).collect();
        for (m, c) in mean.iter_mut().zip(&rational) {
            *m += support.prob(i) * c;
        }
        coords.push(rational);
    }
    let tol = rational_of(1e-10);
    let max_abs = mean.iter().map(|m| m.abs()).max().unwrap_or_else(BigRational::zero);
    if max_abs > tol {
        return Err(Error::NonZeroMean { max_abs_mean: rational_to_f64(&max_abs) });
    }
    Ok(coords)
}

/// Estimate kappa for a finite mean-zero law. Exact for d = 1; for d > 1 a
/// deterministic low-discrepancy sweep of `direction_budget` unit functionals
/// upper-bounds the infimum and the estimate is flagged accordingly.
pub fn kappa_of(
    dist: &DistributionSpec,
    _norm: &NormSpec,
    direction_budget: usize,
) -> Result<KappaEstimate> {
    let support = dist.finite_support()?;
    let coords = require_mean_zero(&support)?;
    let dim = coords[0].len();

    if dim == 1 {
        let mut e_abs = BigRational::zero();
        let mut e_sq = BigRational::zero();
        for (i, c) in coords.iter().enumerate() {
            let y = &c[0];
            e_abs += support.prob(i) * y.abs();
            e_sq += support.prob(i) * (y * y);
        }
        if e_sq.is_zero() {
            // Y = 0 a.s.; every ratio is 0/0, and the implied bound is vacuous.
            return Ok(KappaEstimate {
                kappa: 0.0,
                exact: true,
                directions_tried: 0,
                rational: Some(BigRational::zero()),
            });
        }
        let kappa = (&e_abs * &e_abs) / e_sq;
        return Ok(KappaEstimate {
            kappa: rational_to_f64(&kappa),
            exact: true,
            directions_tried: 0,
            rational: Some(kappa),
        });
    }

    if direction_budget == 0 {
        return Err(Error::Config("direction budget must be >= 1 for d > 1".into()));
    }
    let atoms_f64: Vec<Vec<f64>> = (0..support.len())
        .map(|i| support.atom(i).as_real().map(|v| v.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    let probs_f64: Vec<f64> = (0..support.len())
        .map(|i| rational_to_f64(support.prob(i)))
        .collect();

    let mut best = f64::INFINITY;
    let mut tried = 0usize;
    for direction in sphere_sweep(dim, direction_budget) {
        let mut e_abs = 0.0;
        let mut e_sq = 0.0;
        for (atom, &p) in atoms_f64.iter().zip(&probs_f64) {
            let proj: f64 = atom.iter().zip(&direction).map(|(a, d)| a * d).sum();
            e_abs += p * proj.abs();
            e_sq += p * proj * proj;
        }
        if e_sq > 0.0 {
            best = best.min(e_abs * e_abs / e_sq);
            tried += 1;
        }
    }
    if tried == 0 {
        best = 0.0;
    }
    Ok(KappaEstimate { kappa: best, exact: false, directions_tried: tried, rational: None })
}

/// Deterministic low-discrepancy unit directions: a Kronecker sequence with
/// square-root-of-prime increments mapped through the normal quantile and
/// normalized. d = 2 uses equally spaced half-circle angles.
fn sphere_sweep(dim: usize, budget: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        return (0..budget)
            .map(|m| {
                let theta = std::f64::consts::PI * (m as f64 + 0.5) / budget as f64;
                vec![theta.cos(), theta.sin()]
            })
            .collect();
    }
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let alphas: Vec<f64> = (0..dim)
        .map(|c| (PRIMES[c % PRIMES.len()] as f64).sqrt().fract())
        .collect();
    let mut out = Vec::with_capacity(budget);
    for m in 0..budget {
        let mut v: Vec<f64> = (0..dim)
            .map(|c| {
                let u = ((m as f64 + 1.0) * alphas[c]).fract().clamp(1e-12, 1.0 - 1e-12);
                normal.inverse_cdf(u)
            })
            .collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 0.0 {
            for x in v.iter_mut() {
                *x /= len;
            }
            out.push(v);
        }
    }
    out
}

/// Result of the shifted-mean anti-concentration bound.
#[derive(Debug, Clone, Serialize)]
pub struct Prop1Report {
    pub lhs: f64,
    pub kappa: f64,
    pub bound: f64,
    pub holds: bool,
    /// True when both sides were compared in exact rational arithmetic
    /// (d = 1 with exact kappa).
    pub exact: bool,
}

/// Check P(‖a + Y‖ >= ‖a‖) >= kappa / 4 for a finite mean-zero law.
pub fn proposition1_check(
    a: &VectorValue,
    dist: &DistributionSpec,
    norm: &NormSpec,
    direction_budget: usize,
) -> Result<Prop1Report> {
    let support = dist.finite_support()?;
    let kappa = kappa_of(dist, norm, direction_budget)?;

    let mut lhs = BigRational::zero();
    for i in 0..support.len() {
        let y = support.atom(i).as_real()?;
        if y.len() != a.dim() {
            return Err(Error::DimensionMismatch { expected: a.dim(), got: y.len() });
        }
        let shifted = VectorValue::new(
            a.coords().iter().zip(y).map(|(ac, yc)| ac + yc).collect(),
        )?;
        if norm_ge_norm(&shifted, a, norm)? {
            lhs += support.prob(i);
        }
    }

    match &kappa.rational {
        Some(kr) => {
            // 4 * lhs >= kappa, exactly
            let four = BigRational::from_integer(4.into());
            let holds = &four * &lhs >= *kr;
            Ok(Prop1Report {
                lhs: rational_to_f64(&lhs),
                kappa: kappa.kappa,
                bound: kappa.kappa / 4.0,
                holds,
                exact: true,
            })
        }
        None => {
            let lhs_f = rational_to_f64(&lhs);
            Ok(Prop1Report {
                lhs: lhs_f,
                kappa: kappa.kappa,
                bound: kappa.kappa / 4.0,
                holds: lhs_f >= kappa.kappa / 4.0,
                exact: false,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Atom;

    fn zeros(n: usize) -> Vec<Vec<f64>> {
        vec![vec![0.0; n]; n]
    }

    #[test]
    fn eval_examples() {
        // x=1, a=(1), eps=(+1) -> 2
        let f = ChaosForm::scalar(1.0, &[1.0], &zeros(1)).unwrap();
        let v = chaos_eval(&f, &SignVector::new(vec![1]).unwrap()).unwrap();
        assert_eq!(v.coords(), &[2.0]);

        // b_12 = b_21 = 1, eps = (+1, -1) -> -2
        let mut b = zeros(2);
        b[0][1] = 1.0;
        b[1][0] = 1.0;
        let f = ChaosForm::scalar(0.0, &[0.0, 0.0], &b).unwrap();
        let v = chaos_eval(&f, &SignVector::new(vec![1, -1]).unwrap()).unwrap();
        assert_eq!(v.coords(), &[-2.0]);

        // a=(1,1), eps=(-1,-1) -> -2
        let f = ChaosForm::scalar(0.0, &[1.0, 1.0], &zeros(2)).unwrap();
        let v = chaos_eval(&f, &SignVector::new(vec![-1, -1]).unwrap()).unwrap();
        assert_eq!(v.coords(), &[-2.0]);
    }

    #[test]
    fn rejects_nonzero_diagonal() {
        let mut b = zeros(2);
        b[1][1] = 3.0;
        assert!(ChaosForm::scalar(0.0, &[0.0, 0.0], &b).is_err());
    }

    #[test]
    fn moment_examples() {
        // a=(1,1): values {-2, 0, 0, 2} -> L2 = sqrt(2), L4 = 8^(1/4)
        let f = ChaosForm::scalar(0.0, &[1.0, 1.0], &zeros(2)).unwrap();
        let m = chaos_exact_moments(&f, &NormSpec::Absolute, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(m.l2, 2f64.sqrt());
        assert_eq!(m.l4, 8f64.powf(0.25));
        assert_eq!(m.l1, 1.0);
        let sums = m.exact.unwrap();
        assert_eq!(sums.s2, BigInt::from(8));
        assert_eq!(sums.s4, BigInt::from(32));

        // constant form: all moments 5
        let f = ChaosForm::scalar(5.0, &[0.0, 0.0], &zeros(2)).unwrap();
        let m = chaos_exact_moments(&f, &NormSpec::Absolute, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!((m.l1, m.l2, m.l4), (5.0, 5.0, 5.0));

        // b_12 = b_21 = 1: values +-2 -> L2 = 2
        let mut b = zeros(2);
        b[0][1] = 1.0;
        b[1][0] = 1.0;
        let f = ChaosForm::scalar(0.0, &[0.0, 0.0], &b).unwrap();
        let m = chaos_exact_moments(&f, &NormSpec::Absolute, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(m.l2, 2.0);
    }

    #[test]
    fn cap_refusal() {
        let f = ChaosForm::scalar(0.0, &[0.0; 6], &zeros(6)).unwrap();
        assert!(matches!(
            chaos_exact_moments(&f, &NormSpec::Absolute, 5),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn hypercontractivity_example() {
        let f = ChaosForm::scalar(0.0, &[1.0, 1.0], &zeros(2)).unwrap();
        let r = hypercontractivity_report(&f, &NormSpec::Absolute, DEFAULT_PATTERN_CAP).unwrap();
        assert!((r.l4_over_l2 - 2f64.powf(0.25)).abs() < 1e-15);
        assert!(r.holds_l4 && r.holds_l1 && r.interpolation_holds && r.interpolation_exact);

        let c = ChaosForm::scalar(7.0, &[0.0], &zeros(1)).unwrap();
        let r = hypercontractivity_report(&c, &NormSpec::Absolute, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(r.l4_over_l2, 1.0);
        assert_eq!(r.l2_over_l1, 1.0);
    }

    #[test]
    fn lemma2_examples() {
        // x=1, a=(1): values {0, 2} -> p = 1/2, c = 2
        let f = ChaosForm::scalar(1.0, &[1.0], &zeros(1)).unwrap();
        let r = lemma2_check(&f, &NormSpec::Absolute, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(r.p, 0.5);
        assert_eq!(r.measured_c, 2.0);
        assert!(r.exact);

        // a = b = 0 -> p = 1
        let f = ChaosForm::scalar(3.0, &[0.0, 0.0], &zeros(2)).unwrap();
        let r = lemma2_check(&f, &NormSpec::Absolute, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(r.p, 1.0);

        // x=1, b_12=b_21=1: values 1 + 2 eps1 eps2 in {-1, 3}; both have
        // |.| >= 1, so the enumeration gives p = 1.
        let mut b = zeros(2);
        b[0][1] = 1.0;
        b[1][0] = 1.0;
        let f = ChaosForm::scalar(1.0, &[0.0, 0.0], &b).unwrap();
        let r = lemma2_check(&f, &NormSpec::Absolute, DEFAULT_PATTERN_CAP).unwrap();
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn sign_flip_covariance_exact() {
        // eval(eps) + eval(-eps) = 2 (x + quadratic); eval(eps) - eval(-eps)
        // = 2 * linear. Checked exactly on an integer instance.
        let mut b = zeros(3);
        b[0][1] = 2.0;
        b[1][0] = -1.0;
        b[2][0] = 3.0;
        b[0][2] = 1.0;
        let f = ChaosForm::scalar(4.0, &[1.0, -2.0, 5.0], &b).unwrap();
        for mask in 0u64..8 {
            let eps = SignVector::from_mask(mask, 3);
            let flip = eps.flipped();
            let v = chaos_eval(&f, &eps).unwrap();
            let w = chaos_eval(&f, &flip).unwrap();
            // quadratic + constant part
            let zero_a = ChaosForm::new(
                f.x.clone(),
                vec![VectorValue::zero(1); 3],
                f.b.clone(),
            )
            .unwrap();
            let q = chaos_eval(&zero_a, &eps).unwrap();
            let sum = v.add(&w).unwrap();
            assert_eq!(sum, q.scale(2.0));
        }
    }

    #[test]
    fn kappa_examples() {
        // Y uniform {-1, +1}: kappa = 1
        let d = DistributionSpec::Rademacher;
        let k = kappa_of(&d, &NormSpec::Absolute, 0).unwrap();
        assert_eq!(k.kappa, 1.0);
        assert!(k.exact);

        // Y uniform {-1, 0, +1}: kappa = (2/3)^2 / (2/3) = 2/3
        let d = DistributionSpec::uniform_on(vec![
            Point::scalar(-1.0),
            Point::scalar(0.0),
            Point::scalar(1.0),
        ])
        .unwrap();
        let k = kappa_of(&d, &NormSpec::Absolute, 0).unwrap();
        assert!((k.kappa - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kappa_rejects_nonzero_mean() {
        let d = DistributionSpec::uniform_on(vec![Point::scalar(0.0), Point::scalar(1.0)]).unwrap();
        assert!(matches!(
            kappa_of(&d, &NormSpec::Absolute, 0),
            Err(Error::NonZeroMean { .. })
        ));
    }

    #[test]
    fn kappa_two_point_r2_flipped_coordinates() {
        // Y = (1,1) or (-1,-1): every functional sees a symmetric two-point
        // scalar, per-direction ratio 1.
        let d = DistributionSpec::Finite {
            atoms: vec![
                Atom { point: Point::Real(vec![1.0, 1.0]), prob: 0.5 },
                Atom { point: Point::Real(vec![-1.0, -1.0]), prob: 0.5 },
            ],
        };
        let k = kappa_of(&d, &NormSpec::Euclidean, 64).unwrap();
        assert!(!k.exact);
        assert!((k.kappa - 1.0).abs() < 1e-9, "kappa = {}", k.kappa);
    }

    #[test]
    fn proposition1_examples() {
        // a = 1, Y uniform {-1, +1}: lhs = 1/2 >= 1/4
        let a = VectorValue::scalar(1.0).unwrap();
        let r =
            proposition1_check(&a, &DistributionSpec::Rademacher, &NormSpec::Absolute, 0).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert!(r.holds && r.exact);

        // a = 0: lhs = 1
        let a = VectorValue::scalar(0.0).unwrap();
        let r =
            proposition1_check(&a, &DistributionSpec::Rademacher, &NormSpec::Absolute, 0).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!(r.holds);

        // a = 1, Y uniform {-1, 0, 1}: lhs = 2/3 >= (2/3)/4
        let a = VectorValue::scalar(1.0).unwrap();
        let d = DistributionSpec::uniform_on(vec![
            Point::scalar(-1.0),
            Point::scalar(0.0),
            Point::scalar(1.0),
        ])
        .unwrap();
        let r = proposition1_check(&a, &d, &NormSpec::Absolute, 0).unwrap();
        assert!((r.lhs - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.holds && r.exact);
    }

    #[test]
    fn lemma2_sampled_flags_approximate() {
        let f = ChaosForm::scalar(1.0, &[1.0, 0.0, 0.0], &zeros(3)).unwrap();
        let r = lemma2_check_sampled(
            &f,
            &NormSpec::Absolute,
            &McParams { replicates: 2000, seed: 11, confidence: 0.95 },
        )
        .unwrap();
        assert!(!r.exact);
        let [lo, hi] = r.ci.unwrap();
        assert!(lo <= r.p && r.p <= hi);
        assert!((r.p - 0.5).abs() < 0.05);
    }
}

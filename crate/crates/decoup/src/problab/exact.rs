//! Exact laws of statistics over finite product spaces.
//!
//! Sample rows over a finite support are enumerated exhaustively; each outcome
//! carries an exact rational probability (product of atom probabilities), so
//! tail values are exact rationals and inequality verdicts are arithmetic
//! facts about the instance. Norm thresholds are compared through the exact
//! rational keys of [`crate::model::norm`], which keeps indicators like
//! `‖S‖ >= 2t/3` exact as well.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::dist::FiniteSupport;
use crate::model::kernel::KernelFamily;
use crate::model::norm::{
    norm_key, norm_of, rational_of, rational_to_f64, scaled_threshold_key, NormSpec,
};
use crate::model::value::{Point, VectorValue};
use crate::ustat;

/// Which sum the engine is looking at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// One sample row feeds every argument slot.
    Coupled,
    /// Copy j feeds argument slot j.
    Decoupled,
    /// The four-term polarized sum (k = 2).
    PolarizedTn,
    /// The mixed sum over f_{ij}(xt_i, x_j) (k = 2); its law equals the k = 2
    /// decoupled law, but pointwise it is tied to the (x, xt) pair.
    Mixed,
}

impl Statistic {
    pub fn copies(&self, order: usize) -> usize {
        match self {
            Statistic::Coupled => 1,
            Statistic::Decoupled => order,
            Statistic::PolarizedTn | Statistic::Mixed => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Statistic::Coupled => "coupled",
            Statistic::Decoupled => "decoupled",
            Statistic::PolarizedTn => "tn",
            Statistic::Mixed => "mixed",
        }
    }

    pub fn parse(s: &str) -> Result<Statistic> {
        match s {
            "coupled" => Ok(Statistic::Coupled),
            "decoupled" => Ok(Statistic::Decoupled),
            "tn" | "polarized" | "polarized-tn" => Ok(Statistic::PolarizedTn),
            "mixed" => Ok(Statistic::Mixed),
            other => Err(Error::Config(format!("unknown statistic '{other}'"))),
        }
    }

    fn requires_order2(&self) -> bool {
        matches!(self, Statistic::PolarizedTn | Statistic::Mixed)
    }
}

/// Resource caps for the exact engine.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EngineCaps {
    /// Maximum number of product-space outcomes to enumerate.
    pub max_outcomes: u128,
}

impl Default for EngineCaps {
    fn default() -> Self {
        EngineCaps { max_outcomes: 1 << 24 }
    }
}

/// Evaluate the statistic on materialized rows (rows[0] = X, rows[1] = X~
/// for the two-copy statistics).
pub fn statistic_value(
    stat: Statistic,
    kernel: &KernelFamily,
    rows: &[Vec<Point>],
) -> Result<VectorValue> {
    match stat {
        Statistic::Coupled => ustat::coupled_value(kernel, &rows[0]),
        Statistic::Decoupled => {
            let refs: Vec<&[Point]> = rows.iter().map(|r| r.as_slice()).collect();
            ustat::decoupled_value(kernel, &refs)
        }
        Statistic::PolarizedTn => ustat::polarized_value(kernel, &rows[0], &rows[1]),
        Statistic::Mixed => ustat::cross_value(kernel, &rows[1], &rows[0]),
    }
}

/// Enumerate all assignments of `positions` i.i.d. draws from `support`.
/// The callback receives the atom indices and the exact outcome probability.
pub(crate) fn for_each_assignment(
    support: &FiniteSupport,
    positions: usize,
    f: &mut impl FnMut(&[usize], &BigRational) -> Result<()>,
) -> Result<()> {
    let mut assign = vec![0usize; positions];
    if support.is_uniform() {
        // All outcomes share one probability; skip per-step products.
        let m = support.len() as i64;
        let mut prob = BigRational::one();
        for _ in 0..positions {
            prob /= BigRational::from_integer(m.into());
        }
        return enumerate_uniform(support.len(), positions, 0, &mut assign, &prob, f);
    }
    let mut stack: Vec<BigRational> = Vec::with_capacity(positions + 1);
    stack.push(BigRational::one());
    enumerate_weighted(support, positions, 0, &mut assign, &mut stack, f)
}

fn enumerate_uniform(
    m: usize,
    positions: usize,
    depth: usize,
    assign: &mut Vec<usize>,
    prob: &BigRational,
    f: &mut impl FnMut(&[usize], &BigRational) -> Result<()>,
) -> Result<()> {
    if depth == positions {
        return f(assign, prob);
    }
    for a in 0..m {
        assign[depth] = a;
        enumerate_uniform(m, positions, depth + 1, assign, prob, f)?;
    }
    Ok(())
}

fn enumerate_weighted(
    support: &FiniteSupport,
    positions: usize,
    depth: usize,
    assign: &mut Vec<usize>,
    stack: &mut Vec<BigRational>,
    f: &mut impl FnMut(&[usize], &BigRational) -> Result<()>,
) -> Result<()> {
    if depth == positions {
        let prob = stack.last().expect("probability stack nonempty").clone();
        return f(assign, &prob);
    }
    for a in 0..support.len() {
        assign[depth] = a;
        let next = stack.last().expect("stack") * support.prob(a);
        stack.push(next);
        enumerate_weighted(support, positions, depth + 1, assign, stack, f)?;
        stack.pop();
    }
    Ok(())
}

/// Write the atoms named by `assign` into `rows` (copies x n, row-major).
pub(crate) fn assignment_rows(
    support: &FiniteSupport,
    assign: &[usize],
    copies: usize,
    n: usize,
    rows: &mut Vec<Vec<Point>>,
) {
    debug_assert_eq!(assign.len(), copies * n);
    rows.clear();
    for c in 0..copies {
        rows.push(
            (0..n)
                .map(|i| support.atom(assign[c * n + i]).clone())
                .collect(),
        );
    }
}

pub(crate) fn check_cap(support_len: usize, positions: usize, caps: &EngineCaps) -> Result<u128> {
    let mut needed: u128 = 1;
    for _ in 0..positions {
        needed = needed
            .checked_mul(support_len as u128)
            .ok_or(Error::CapExceeded { needed: u128::MAX, cap: caps.max_outcomes })?;
        if needed > caps.max_outcomes {
            return Err(Error::CapExceeded { needed, cap: caps.max_outcomes });
        }
    }
    Ok(needed)
}

/// Accumulates (value, probability) pairs, merging duplicate values exactly.
pub struct LawBuilder {
    index: HashMap<Vec<u64>, usize>,
    entries: Vec<(VectorValue, BigRational)>,
}

impl LawBuilder {
    pub fn new() -> LawBuilder {
        LawBuilder { index: HashMap::new(), entries: Vec::new() }
    }

    pub fn push(&mut self, value: VectorValue, prob: &BigRational) {
        match self.index.get(&value.bits_key()) {
            Some(&i) => {
                self.entries[i].1 += prob;
            }
            None => {
                self.index.insert(value.bits_key(), self.entries.len());
                self.entries.push((value, prob.clone()));
            }
        }
    }

    pub fn finish(mut self) -> VectorLaw {
        self.entries.sort_by(|a, b| a.0.bits_key().cmp(&b.0.bits_key()));
        VectorLaw { entries: self.entries }
    }
}

impl Default for LawBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Exact law of a vector-valued statistic: distinct values with rational
/// probabilities summing to 1.
#[derive(Debug, Clone)]
pub struct VectorLaw {
    entries: Vec<(VectorValue, BigRational)>,
}

impl VectorLaw {
    pub fn entries(&self) -> &[(VectorValue, BigRational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> BigRational {
        self.entries.iter().map(|(_, p)| p).sum()
    }

    /// Law of V + W for independent V ~ self, W ~ other.
    pub fn convolve(&self, other: &VectorLaw) -> Result<VectorLaw> {
        let mut builder = LawBuilder::new();
        for (v, pv) in &self.entries {
            for (w, pw) in &other.entries {
                builder.push(v.add(w)?, &(pv * pw));
            }
        }
        Ok(builder.finish())
    }
}

/// Exact law of the statistic under `dist`, with rows of length `n`.
pub fn exact_vector_law(
    stat: Statistic,
    kernel: &KernelFamily,
    support: &FiniteSupport,
    n: usize,
    caps: &EngineCaps,
) -> Result<VectorLaw> {
    if stat.requires_order2() && kernel.order() != 2 {
        return Err(Error::KernelOrder { expected: 2, got: kernel.order() });
    }
    let copies = stat.copies(kernel.order());
    let positions = copies * n;
    check_cap(support.len(), positions, caps)?;
    let mut builder = LawBuilder::new();
    let mut rows: Vec<Vec<Point>> = Vec::new();
    for_each_assignment(support, positions, &mut |assign, prob| {
        assignment_rows(support, assign, copies, n, &mut rows);
        let v = statistic_value(stat, kernel, &rows)?;
        builder.push(v, prob);
        Ok(())
    })?;
    Ok(builder.finish())
}

/// The law of ‖S‖ as sorted exact keys with cumulative tail masses.
#[derive(Debug, Clone)]
pub struct NormLaw {
    norm: NormSpec,
    /// Ascending by key.
    keys: Vec<BigRational>,
    norm_values: Vec<f64>,
    probs: Vec<BigRational>,
    /// cum_top[i] = sum of probs[i..].
    cum_top: Vec<BigRational>,
}

impl NormLaw {
    pub fn from_vector_law(law: &VectorLaw, norm: &NormSpec) -> Result<NormLaw> {
        let mut keyed: Vec<(BigRational, f64, BigRational)> = Vec::with_capacity(law.len());
        for (v, p) in law.entries() {
            let nv = norm_of(v, norm)?;
            let key = match norm_key(v, norm)? {
                Some(k) => k,
                None => rational_of(nv), // non-integer p-norm fallback
            };
            keyed.push((key, nv, p.clone()));
        }
        keyed.sort_by(|a, b| a.0.cmp(&b.0));

        let mut keys: Vec<BigRational> = Vec::new();
        let mut norm_values: Vec<f64> = Vec::new();
        let mut probs: Vec<BigRational> = Vec::new();
        for (key, nv, p) in keyed {
            if keys.last() == Some(&key) {
                let last = probs.last_mut().expect("parallel vectors");
                *last += p;
            } else {
                keys.push(key);
                norm_values.push(nv);
                probs.push(p);
            }
        }
        let mut cum_top = vec![BigRational::zero(); keys.len()];
        let mut acc = BigRational::zero();
        for i in (0..keys.len()).rev() {
            acc += &probs[i];
            cum_top[i] = acc.clone();
        }
        Ok(NormLaw { norm: norm.clone(), keys, norm_values, probs, cum_top })
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    /// P(‖S‖ >= t), exact. Thresholds t <= 0 give 1.
    pub fn tail(&self, t: f64) -> BigRational {
        if t <= 0.0 {
            return self.total();
        }
        match scaled_threshold_key(t, 1, 1, &self.norm) {
            Some(key) => self.tail_at_key(&key),
            None => {
                // non-integer p-norm: keys are the raw f64 norm values
                self.tail_at_key(&rational_of(t))
            }
        }
    }

    /// P(‖S‖ >= t * numer / denom), exact in the scaled threshold.
    pub fn tail_scaled(&self, t: f64, numer: u32, denom: u32) -> BigRational {
        if t <= 0.0 {
            return self.total();
        }
        match scaled_threshold_key(t, numer, denom, &self.norm) {
            Some(key) => self.tail_at_key(&key),
            None => {
                let scaled = t * numer as f64 / denom as f64;
                self.tail_at_key(&rational_of(scaled))
            }
        }
    }

    pub(crate) fn tail_at_key(&self, key: &BigRational) -> BigRational {
        let idx = self.keys.partition_point(|k| k < key);
        if idx == self.keys.len() {
            BigRational::zero()
        } else {
            self.cum_top[idx].clone()
        }
    }

    pub fn total(&self) -> BigRational {
        self.cum_top.first().cloned().unwrap_or_else(BigRational::zero)
    }

    /// Smallest norm value v with P(‖S‖ <= v) >= p.
    pub fn quantile(&self, p: f64) -> f64 {
        let target = rational_of(p.clamp(0.0, 1.0)) * self.total();
        let mut acc = BigRational::zero();
        for i in 0..self.keys.len() {
            acc += &self.probs[i];
            if acc >= target {
                return self.norm_values[i];
            }
        }
        *self.norm_values.last().unwrap_or(&0.0)
    }

    pub fn max_norm(&self) -> f64 {
        *self.norm_values.last().unwrap_or(&0.0)
    }

    /// (norm value, probability) pairs, ascending, probabilities as f64.
    pub fn atoms_f64(&self) -> Vec<(f64, f64)> {
        self.norm_values
            .iter()
            .zip(&self.probs)
            .map(|(&v, p)| (v, rational_to_f64(p)))
            .collect()
    }
}

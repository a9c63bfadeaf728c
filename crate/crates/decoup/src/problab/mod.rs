//! Probability engines: exact tails over finite product spaces, seeded Monte
//! Carlo tails with exact binomial confidence bounds, and the empirical
//! decoupling-constant search.
//!
//! Monte Carlo determinism: replicate r draws from a ChaCha8 stream keyed by
//! `(seed, r)`, so partitioning replicates across any number of workers cannot
//! change a single draw. Identical `(seed, params)` give byte-identical
//! serialized curves whether the run uses 1, 2, or 8 threads.
//!
//! Inequality checking under MC is conservative: an inequality is *certified*
//! only when the unfavorable CI endpoints already satisfy it, *refuted* only
//! when they already violate it, and *inconclusive* otherwise. Noise never
//! certifies a theorem.

pub mod exact;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::model::dist::FiniteSupport;
use crate::model::kernel::KernelFamily;
use crate::model::norm::{norm_of, rational_of, rational_to_f64, NormSpec};
use crate::model::value::Point;
use crate::model::{check_kernel_symmetry, DistributionSpec};
use crate::report::derive_seed;

pub use exact::{exact_vector_law, EngineCaps, LawBuilder, NormLaw, Statistic, VectorLaw};

/// Schema version stamped on serialized curves and reports.
pub const SCHEMA_VERSION: u32 = 1;

/// Default number of points in an auto-generated threshold grid.
pub const DEFAULT_T_POINTS: usize = 64;

/// Trials used when an operation must verify the permutation-symmetry
/// hypothesis before running.
const SYMMETRY_TRIALS: usize = 200;
const SYMMETRY_SEED: u64 = 0x5ca1_ab1e;

/// Estimated or exact values of t -> P(‖S‖ >= t) on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub schema_version: u32,
    pub statistic: String,
    pub mode: CurveMode,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    Exact,
    Estimated,
}

impl TailCurve {
    /// Structural invariants: values in [0,1] nonincreasing over an ascending
    /// grid; CIs sandwich the estimate; exact curves carry no CI.
    pub fn validate(&self) -> Result<()> {
        if self.t.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("tail grid must be strictly ascending".into()));
        }
        for w in self.p.windows(2) {
            if w[0] < w[1] {
                return Err(Error::Config("tail values must be nonincreasing".into()));
            }
        }
        if self.p.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Config("tail values must lie in [0, 1]".into()));
        }
        match (self.mode, &self.ci) {
            (CurveMode::Exact, Some(_)) => {
                return Err(Error::Config("exact curves carry no CI".into()))
            }
            (CurveMode::Estimated, Some(ci)) => {
                for (i, [lo, hi]) in ci.iter().enumerate() {
                    if !(lo <= &self.p[i] && &self.p[i] <= hi) {
                        return Err(Error::Config("CI must bracket the estimate".into()));
                    }
                }
            }
            (CurveMode::Estimated, None) => {
                return Err(Error::Config("estimated curves need CIs".into()))
            }
            (CurveMode::Exact, None) => {}
        }
        Ok(())
    }
}

/// Monte Carlo engine parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McParams {
    pub replicates: u64,
    pub seed: u64,
    pub confidence: f64,
}

impl McParams {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(Error::Config(format!(
                "Monte Carlo needs >= 100 replicates, got {}",
                self.replicates
            )));
        }
        if !(0.0 < self.confidence && self.confidence < 1.0) {
            return Err(Error::Config(format!(
                "confidence must be in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Which engine evaluates tails.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineConfig {
    Exact { caps: EngineCaps },
    Mc { params: McParams },
}

impl EngineConfig {
    pub fn name(&self) -> &'static str {
        match self {
            EngineConfig::Exact { .. } => "exact",
            EngineConfig::Mc { .. } => "mc",
        }
    }
}

/// Exact binomial (Clopper-Pearson) interval for `successes` out of `n` at
/// the given two-sided confidence level. At the boundary counts the interval
/// is one-sided, so `k = 0` gives an upper bound of `1 - alpha^(1/n)`.
pub fn clopper_pearson(successes: u64, n: u64, confidence: f64) -> (f64, f64) {
    assert!(n > 0, "empty sample has no interval");
    let alpha = 1.0 - confidence;
    let k = successes;
    let nf = n as f64;
    let lo = if k == 0 {
        0.0
    } else if k == n {
        alpha.powf(1.0 / nf)
    } else {
        Beta::new(k as f64, (n - k + 1) as f64)
            .expect("valid Beta shapes")
            .inverse_cdf(alpha / 2.0)
    };
    let hi = if k == n {
        1.0
    } else if k == 0 {
        1.0 - alpha.powf(1.0 / nf)
    } else {
        Beta::new((k + 1) as f64, (n - k) as f64)
            .expect("valid Beta shapes")
            .inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0))
}

/// Replicate norms of one statistic; the MC analogue of a `NormLaw`.
#[derive(Debug, Clone)]
pub struct McSample {
    sorted: Vec<f64>,
    params: McParams,
}

impl McSample {
    pub fn replicates(&self) -> u64 {
        self.params.replicates
    }

    pub fn count_ge(&self, t: f64) -> u64 {
        if t <= 0.0 {
            return self.sorted.len() as u64;
        }
        let idx = self.sorted.partition_point(|&v| v < t);
        (self.sorted.len() - idx) as u64
    }

    pub fn estimate(&self, t: f64) -> f64 {
        self.count_ge(t) as f64 / self.sorted.len() as f64
    }

    pub fn bounds(&self, t: f64) -> (f64, f64) {
        clopper_pearson(self.count_ge(t), self.sorted.len() as u64, self.params.confidence)
    }

    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let idx = ((q.clamp(0.0, 1.0)) * (n - 1) as f64).ceil() as usize;
        self.sorted[idx.min(n - 1)]
    }

    pub fn max_norm(&self) -> f64 {
        *self.sorted.last().unwrap_or(&0.0)
    }
}

enum RowSampler {
    Finite(FiniteSupport),
    Generator(DistributionSpec),
}

impl RowSampler {
    fn new(dist: &DistributionSpec) -> Result<RowSampler> {
        dist.validate()?;
        Ok(if dist.is_finite() {
            RowSampler::Finite(dist.finite_support()?)
        } else {
            RowSampler::Generator(dist.clone())
        })
    }

    fn fill_row(&self, n: usize, rng: &mut ChaCha8Rng, row: &mut Vec<Point>) {
        row.clear();
        match self {
            RowSampler::Finite(s) => {
                for _ in 0..n {
                    row.push(s.atom(s.sample_index(rng)).clone());
                }
            }
            RowSampler::Generator(d) => {
                for _ in 0..n {
                    row.push(d.sample_point(rng));
                }
            }
        }
    }
}

/// Draw `params.replicates` independent realizations of the statistic's norm.
/// Replicate r uses stream r of the seed; output order is by replicate index.
pub fn mc_sample(
    stat: Statistic,
    kernel: &KernelFamily,
    dist: &DistributionSpec,
    n: usize,
    norm: &NormSpec,
    params: &McParams,
) -> Result<McSample> {
    params.validate()?;
    norm.validate()?;
    let sampler = RowSampler::new(dist)?;
    let copies = stat.copies(kernel.order());
    let norms: Vec<f64> = (0..params.replicates)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(r);
            let mut rows: Vec<Vec<Point>> = vec![Vec::with_capacity(n); copies];
            for row in rows.iter_mut() {
                sampler.fill_row(n, &mut rng, row);
            }
            let value = exact::statistic_value(stat, kernel, &rows)?;
            norm_of(&value, norm)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut sorted = norms;
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("norms are finite"));
    Ok(McSample { sorted, params: *params })
}

/// Exact tail curve of the statistic on `t_grid`.
pub fn exact_tail(
    stat: Statistic,
    kernel: &KernelFamily,
    dist: &DistributionSpec,
    n: usize,
    norm: &NormSpec,
    t_grid: &[f64],
    caps: &EngineCaps,
) -> Result<TailCurve> {
    let support = dist.finite_support()?;
    let law = exact_vector_law(stat, kernel, &support, n, caps)?;
    let norm_law = NormLaw::from_vector_law(&law, norm)?;
    let grid = clean_grid(t_grid)?;
    let p: Vec<f64> = grid.iter().map(|&t| rational_to_f64(&norm_law.tail(t))).collect();
    let curve = TailCurve {
        schema_version: SCHEMA_VERSION,
        statistic: stat.name().to_string(),
        mode: CurveMode::Exact,
        t: grid,
        p,
        ci: None,
        replicates: None,
        seed: None,
        confidence: None,
    };
    curve.validate()?;
    Ok(curve)
}

/// Monte Carlo tail curve with Clopper-Pearson CIs.
pub fn mc_tail(
    stat: Statistic,
    kernel: &KernelFamily,
    dist: &DistributionSpec,
    n: usize,
    norm: &NormSpec,
    t_grid: &[f64],
    params: &McParams,
) -> Result<TailCurve> {
    let sample = mc_sample(stat, kernel, dist, n, norm, params)?;
    let grid = clean_grid(t_grid)?;
    let mut p = Vec::with_capacity(grid.len());
    let mut ci = Vec::with_capacity(grid.len());
    for &t in &grid {
        p.push(sample.estimate(t));
        let (lo, hi) = sample.bounds(t);
        ci.push([lo, hi]);
    }
    let curve = TailCurve {
        schema_version: SCHEMA_VERSION,
        statistic: stat.name().to_string(),
        mode: CurveMode::Estimated,
        t: grid,
        p,
        ci: Some(ci),
        replicates: Some(params.replicates),
        seed: Some(params.seed),
        confidence: Some(params.confidence),
    };
    curve.validate()?;
    Ok(curve)
}

fn clean_grid(t_grid: &[f64]) -> Result<Vec<f64>> {
    if t_grid.is_empty() {
        return Err(Error::Config("empty threshold grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config("threshold grid entries must be finite".into()));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    grid.dedup();
    Ok(grid)
}

/// One side of a constant search: something that can answer tail queries at
/// arbitrary thresholds, exactly or with CI bounds.
pub enum TailSource {
    Exact(NormLaw),
    Mc(McSample),
}

impl TailSource {
    pub fn point(&self, t: f64) -> f64 {
        match self {
            TailSource::Exact(law) => rational_to_f64(&law.tail(t)),
            TailSource::Mc(s) => s.estimate(t),
        }
    }

    /// (lower, upper) bounds; collapses to the exact value in exact mode.
    pub fn bounds(&self, t: f64) -> (f64, f64) {
        match self {
            TailSource::Exact(law) => {
                let p = rational_to_f64(&law.tail(t));
                (p, p)
            }
            TailSource::Mc(s) => s.bounds(t),
        }
    }

    fn exact(&self, t: f64) -> Option<BigRational> {
        match self {
            TailSource::Exact(law) => Some(law.tail(t)),
            TailSource::Mc(_) => None,
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        match self {
            TailSource::Exact(law) => law.quantile(q),
            TailSource::Mc(s) => s.quantile(q),
        }
    }

    fn max_norm(&self) -> f64 {
        match self {
            TailSource::Exact(law) => law.max_norm(),
            TailSource::Mc(s) => s.max_norm(),
        }
    }
}

/// Geometric grid of `points` thresholds spanning the [q01, q999] range of
/// the source's law, the default grid for every tail comparison.
pub fn default_t_grid(source: &TailSource, points: usize) -> Vec<f64> {
    let hi = source.quantile(0.999);
    if !(hi > 0.0) {
        // statistic is (essentially) 0; any positive threshold works
        let top = source.max_norm();
        return vec![if top > 0.0 { top } else { 1.0 }];
    }
    let mut lo = source.quantile(0.01);
    if !(lo > 0.0) || lo >= hi {
        lo = hi * 1e-3;
    }
    if points <= 1 {
        return vec![hi];
    }
    let ratio = hi / lo;
    let mut grid: Vec<f64> = (0..points)
        .map(|i| lo * ratio.powf(i as f64 / (points - 1) as f64))
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    grid.dedup();
    grid
}

/// Default constant search grid: 2^(j/4) for j = 0..=28.
pub fn default_c_grid() -> Vec<f64> {
    (0..=28).map(|j| 2f64.powf(j as f64 / 4.0)).collect()
}

/// Which side of the tail comparison is being searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// coupled tail <= C * decoupled tail at threshold t / C.
    Decoupling = 1,
    /// coupled tail >= (1/C) * decoupled tail at threshold C * t.
    Reverse = 2,
}

impl Direction {
    pub fn parse(v: u8) -> Result<Direction> {
        match v {
            1 => Ok(Direction::Decoupling),
            2 => Ok(Direction::Reverse),
            other => Err(Error::Config(format!("direction must be 1 or 2, got {other}"))),
        }
    }

    pub fn as_u8(&self) -> u8 {
        match self {
            Direction::Decoupling => 1,
            Direction::Reverse => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum IneqStatus {
    Certified,
    Violated,
    Inconclusive,
}

/// Check the direction's inequality at one (C, t), conservatively under MC.
/// Returns the status and the (lhs, rhs, margin) triple actually compared.
fn check_at(
    direction: Direction,
    lhs: &TailSource,
    rhs: &TailSource,
    c: f64,
    t: f64,
) -> (IneqStatus, f64, f64) {
    match direction {
        Direction::Decoupling => {
            // P_cpl(t) <= C * P_dec(t / C)
            let (l_lo, l_hi) = lhs.bounds(t);
            let (r_lo, r_hi) = rhs.bounds(t / c);
            if let (Some(le), Some(re)) = (lhs.exact(t), rhs.exact(t / c)) {
                let rhs_val = rational_of(c) * re;
                let status =
                    if le <= rhs_val { IneqStatus::Certified } else { IneqStatus::Violated };
                return (status, rational_to_f64(&le), rational_to_f64(&rhs_val));
            }
            if l_hi <= c * r_lo {
                (IneqStatus::Certified, l_hi, c * r_lo)
            } else if l_lo > c * r_hi {
                (IneqStatus::Violated, l_lo, c * r_hi)
            } else {
                (IneqStatus::Inconclusive, l_hi, c * r_lo)
            }
        }
        Direction::Reverse => {
            // P_cpl(t) >= (1/C) * P_dec(C * t)
            let (l_lo, l_hi) = lhs.bounds(t);
            let (r_lo, r_hi) = rhs.bounds(c * t);
            if let (Some(le), Some(re)) = (lhs.exact(t), rhs.exact(c * t)) {
                let rhs_val = re / rational_of(c);
                let status =
                    if le >= rhs_val { IneqStatus::Certified } else { IneqStatus::Violated };
                return (status, rational_to_f64(&le), rational_to_f64(&rhs_val));
            }
            if l_lo >= r_hi / c {
                (IneqStatus::Certified, l_lo, r_hi / c)
            } else if l_hi < r_lo / c {
                (IneqStatus::Violated, l_hi, r_lo / c)
            } else {
                (IneqStatus::Inconclusive, l_lo, r_hi / c)
            }
        }
    }
}

/// Empirical constant report for one direction of the tail comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantReport {
    pub schema_version: u32,
    pub direction: u8,
    pub engine: String,
    pub c_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Smallest grid constant satisfying the inequality at every grid t;
    /// `None` is the infinity sentinel (no grid constant suffices).
    pub c_empirical: Option<f64>,
    /// Binding threshold: tightest margin at the found constant, or the
    /// violating threshold at the largest tried constant.
    pub witness_t: f64,
    pub witness_lhs: f64,
    pub witness_rhs: f64,
    pub witness_margin: f64,
    /// True when CI overlap left some (C, t) undecided before a certificate
    /// was found.
    pub inconclusive: bool,
}

fn search_constant(
    direction: Direction,
    lhs: &TailSource,
    rhs: &TailSource,
    t_grid: &[f64],
    c_grid: &[f64],
    engine_name: &str,
) -> ConstantReport {
    let mut inconclusive_seen = false;
    let mut last_violation: Option<(f64, f64, f64)> = None; // (t, lhs, rhs)
    for &c in c_grid {
        let mut worst: Option<(f64, f64, f64, f64)> = None; // margin, t, lhs, rhs
        let mut status_all = IneqStatus::Certified;
        for &t in t_grid {
            let (status, l, r) = check_at(direction, lhs, rhs, c, t);
            let margin = match direction {
                Direction::Decoupling => r - l,
                Direction::Reverse => l - r,
            };
            match status {
                IneqStatus::Certified => {}
                IneqStatus::Violated => {
                    status_all = IneqStatus::Violated;
                    last_violation = Some((t, l, r));
                    break;
                }
                IneqStatus::Inconclusive => {
                    inconclusive_seen = true;
                    if status_all == IneqStatus::Certified {
                        status_all = IneqStatus::Inconclusive;
                    }
                    last_violation = Some((t, l, r));
                }
            }
            if worst.map_or(true, |(m, ..)| margin < m) {
                worst = Some((margin, t, l, r));
            }
        }
        if status_all == IneqStatus::Certified {
            let (margin, t, l, r) = worst.expect("nonempty grid");
            return ConstantReport {
                schema_version: SCHEMA_VERSION,
                direction: direction.as_u8(),
                engine: engine_name.to_string(),
                c_grid: c_grid.to_vec(),
                t_grid: t_grid.to_vec(),
                c_empirical: Some(c),
                witness_t: t,
                witness_lhs: l,
                witness_rhs: r,
                witness_margin: margin,
                inconclusive: false,
            };
        }
    }
    let (t, l, r) = last_violation.unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    ConstantReport {
        schema_version: SCHEMA_VERSION,
        direction: direction.as_u8(),
        engine: engine_name.to_string(),
        c_grid: c_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        c_empirical: None,
        witness_t: t,
        witness_lhs: l,
        witness_rhs: r,
        witness_margin: match direction {
            Direction::Decoupling => r - l,
            Direction::Reverse => l - r,
        },
        inconclusive: inconclusive_seen,
    }
}

fn build_sources(
    kernel: &KernelFamily,
    dist: &DistributionSpec,
    n: usize,
    norm: &NormSpec,
    engine: &EngineConfig,
) -> Result<(TailSource, TailSource)> {
    match engine {
        EngineConfig::Exact { caps } => {
            let support = dist.finite_support()?;
            let coupled = exact_vector_law(Statistic::Coupled, kernel, &support, n, caps)?;
            let decoupled = exact_vector_law(Statistic::Decoupled, kernel, &support, n, caps)?;
            Ok((
                TailSource::Exact(NormLaw::from_vector_law(&coupled, norm)?),
                TailSource::Exact(NormLaw::from_vector_law(&decoupled, norm)?),
            ))
        }
        EngineConfig::Mc { params } => {
            let lhs_params = McParams { seed: derive_seed(params.seed, "coupled"), ..*params };
            let rhs_params = McParams { seed: derive_seed(params.seed, "decoupled"), ..*params };
            let coupled = mc_sample(Statistic::Coupled, kernel, dist, n, norm, &lhs_params)?;
            let decoupled = mc_sample(Statistic::Decoupled, kernel, dist, n, norm, &rhs_params)?;
            Ok((TailSource::Mc(coupled), TailSource::Mc(decoupled)))
        }
    }
}

/// Smallest grid constant making the chosen direction of the tail comparison
/// hold at every grid threshold. Direction 2 requires the kernel to pass the
/// permutation-symmetry check first.
pub fn find_constant(
    direction: Direction,
    kernel: &KernelFamily,
    dist: &DistributionSpec,
    n: usize,
    norm: &NormSpec,
    t_grid: Option<&[f64]>,
    c_grid: Option<&[f64]>,
    engine: &EngineConfig,
) -> Result<ConstantReport> {
    if direction == Direction::Reverse {
        require_symmetry(kernel, dist)?;
    }
    let (lhs, rhs) = build_sources(kernel, dist, n, norm, engine)?;
    let t_grid = match t_grid {
        Some(g) => clean_grid(g)?,
        None => default_t_grid(&lhs, DEFAULT_T_POINTS),
    };
    let c_grid = match c_grid {
        Some(g) => {
            let mut g = g.to_vec();
            g.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            g
        }
        None => default_c_grid(),
    };
    Ok(search_constant(direction, &lhs, &rhs, &t_grid, &c_grid, engine.name()))
}

fn require_symmetry(kernel: &KernelFamily, dist: &DistributionSpec) -> Result<()> {
    let verdict = check_kernel_symmetry(kernel, dist, SYMMETRY_TRIALS, SYMMETRY_SEED)?;
    match verdict {
        crate::model::SymmetryVerdict::Symmetric => Ok(()),
        crate::model::SymmetryVerdict::Counterexample { indices, permutation, .. } => {
            Err(Error::SymmetryRequired(format!(
                "counterexample at indices {indices:?} under permutation {permutation:?}"
            )))
        }
    }
}

/// One threshold row of the two-sided sandwich.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichRow {
    pub t: f64,
    /// (1/C) P(‖coupled‖ >= C t) vs P(‖decoupled‖ >= t)
    pub left_lhs: f64,
    pub left_rhs: f64,
    pub left_holds: bool,
    /// P(‖decoupled‖ >= t) vs C P(‖coupled‖ >= t / C)
    pub right_lhs: f64,
    pub right_rhs: f64,
    pub right_holds: bool,
}

/// Paired report for both directions plus the sandwich verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoSidedReport {
    pub schema_version: u32,
    pub engine: String,
    pub constant_decoupling: ConstantReport,
    pub constant_reverse: ConstantReport,
    /// max of the two per-direction constants; the sandwich constant.
    pub c_sandwich: Option<f64>,
    pub rows: Vec<SandwichRow>,
    pub certified: bool,
    pub inconclusive: bool,
}

/// Run both directions and certify the two-sided sandwich with the larger of
/// the two empirical constants. The kernel must pass the symmetry check.
pub fn two_sided_comparison(
    kernel: &KernelFamily,
    dist: &DistributionSpec,
    n: usize,
    norm: &NormSpec,
    t_grid: Option<&[f64]>,
    c_grid: Option<&[f64]>,
    engine: &EngineConfig,
) -> Result<TwoSidedReport> {
    require_symmetry(kernel, dist)?;
    let (lhs, rhs) = build_sources(kernel, dist, n, norm, engine)?;
    let t_grid = match t_grid {
        Some(g) => clean_grid(g)?,
        None => default_t_grid(&lhs, DEFAULT_T_POINTS),
    };
    let c_grid = match c_grid {
        Some(g) => {
            let mut g = g.to_vec();
            g.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            g
        }
        None => default_c_grid(),
    };
    let c1 = search_constant(Direction::Decoupling, &lhs, &rhs, &t_grid, &c_grid, engine.name());
    let c2 = search_constant(Direction::Reverse, &lhs, &rhs, &t_grid, &c_grid, engine.name());
    let c_sandwich = match (c1.c_empirical, c2.c_empirical) {
        (Some(a), Some(b)) => Some(a.max(b)),
        _ => None,
    };

    let mut rows = Vec::with_capacity(t_grid.len());
    let mut certified = c_sandwich.is_some();
    if let Some(c) = c_sandwich {
        for &t in &t_grid {
            // left: (1/C) P_cpl(C t) <= P_dec(t), i.e. direction 1 at C t
            let (ls, ll, lr) = check_at(Direction::Decoupling, &lhs, &rhs, c, c * t);
            // right: P_dec(t) <= C P_cpl(t / C), i.e. direction 2 at t / C
            let (rs, rl, rr) = check_at(Direction::Reverse, &lhs, &rhs, c, t / c);
            let left_holds = ls == IneqStatus::Certified;
            let right_holds = rs == IneqStatus::Certified;
            certified &= left_holds && right_holds;
            rows.push(SandwichRow {
                t,
                left_lhs: ll / c,
                left_rhs: lr / c,
                left_holds,
                right_lhs: rr * c,
                right_rhs: rl * c,
                right_holds,
            });
        }
    }
    let inconclusive = c1.inconclusive || c2.inconclusive;
    Ok(TwoSidedReport {
        schema_version: SCHEMA_VERSION,
        engine: engine.name().to_string(),
        constant_decoupling: c1,
        constant_reverse: c2,
        c_sandwich,
        rows,
        certified,
        inconclusive,
    })
}

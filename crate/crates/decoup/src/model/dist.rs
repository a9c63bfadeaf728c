//! Laws for the i.i.d. sample sequence {X_i} and sample-block drawing.
//!
//! Finite-support laws power the exact engines: their atom probabilities are
//! normalized to exact rationals, so product-space enumeration is exact
//! arithmetic. Generator-backed laws (cube, gaussian) are deterministic
//! functions of an RNG stream and only feed the Monte Carlo engine.
//! `rademacher` and `point-cloud` are generators that also expose a finite
//! support, so the exact engine accepts them.

use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::norm::{rational_of, rational_to_f64};
use crate::model::value::Point;

/// One atom of a finite-support law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub point: Point,
    pub prob: f64,
}

/// A law for the i.i.d. sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionSpec {
    /// Finite support; probabilities must be positive and sum to 1 within 1e-12.
    Finite { atoms: Vec<Atom> },
    /// Uniform on the cube [low, high]^dim.
    UniformCube { dim: usize, low: f64, high: f64 },
    /// Standard normal on R^dim.
    Gaussian { dim: usize },
    /// Uniform on {-1, +1} in R^1.
    Rademacher,
    /// Uniform over a fixed list of points in R^N.
    PointCloud { points: Vec<Vec<f64>> },
}

impl DistributionSpec {
    /// Finite support with probabilities proportional to integer weights.
    pub fn finite_from_weights(points: Vec<Point>, weights: &[u64]) -> Result<DistributionSpec> {
        if points.len() != weights.len() || points.is_empty() {
            return Err(Error::InvalidSupport(
                "points and weights must be nonempty and of equal length".into(),
            ));
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::InvalidSupport("weights must be positive".into()));
        }
        let total: u64 = weights.iter().sum();
        let atoms = points
            .into_iter()
            .zip(weights)
            .map(|(point, &w)| Atom { point, prob: w as f64 / total as f64 })
            .collect();
        Ok(DistributionSpec::Finite { atoms })
    }

    pub fn uniform_on(points: Vec<Point>) -> Result<DistributionSpec> {
        let n = points.len() as u64;
        Self::finite_from_weights(points, &vec![1; n as usize])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Finite { atoms } => {
                if atoms.is_empty() {
                    return Err(Error::InvalidSupport("empty support".into()));
                }
                let mut sum = 0.0;
                for a in atoms {
                    if !(a.prob > 0.0) || !a.prob.is_finite() {
                        return Err(Error::InvalidSupport(format!(
                            "atom probability {} is not positive",
                            a.prob
                        )));
                    }
                    sum += a.prob;
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidSupport(format!(
                        "probabilities sum to {sum}, not 1 (tolerance 1e-12)"
                    )));
                }
                let dim = point_dim(&atoms[0].point);
                for a in &atoms[1..] {
                    if point_dim(&a.point) != dim {
                        return Err(Error::InvalidSupport(
                            "atoms mix point dimensions or label/real kinds".into(),
                        ));
                    }
                }
                Ok(())
            }
            DistributionSpec::UniformCube { dim, low, high } => {
                if *dim == 0 {
                    return Err(Error::InvalidSupport("cube dimension must be >= 1".into()));
                }
                if !(low < high) {
                    return Err(Error::InvalidSupport(format!(
                        "cube needs low < high, got [{low}, {high}]"
                    )));
                }
                Ok(())
            }
            DistributionSpec::Gaussian { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidSupport("gaussian dimension must be >= 1".into()));
                }
                Ok(())
            }
            DistributionSpec::Rademacher => Ok(()),
            DistributionSpec::PointCloud { points } => {
                if points.is_empty() {
                    return Err(Error::InvalidSupport("empty point cloud".into()));
                }
                let dim = points[0].len();
                if dim == 0 || points.iter().any(|p| p.len() != dim) {
                    return Err(Error::InvalidSupport(
                        "point cloud needs uniform positive dimension".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Exact finite support, if this law has one.
    pub fn finite_support(&self) -> Result<FiniteSupport> {
        self.validate()?;
        match self {
            DistributionSpec::Finite { atoms } => FiniteSupport::from_atoms(atoms),
            DistributionSpec::Rademacher => FiniteSupport::uniform(vec![
                Point::scalar(-1.0),
                Point::scalar(1.0),
            ]),
            DistributionSpec::PointCloud { points } => {
                FiniteSupport::uniform(points.iter().cloned().map(Point::Real).collect())
            }
            _ => Err(Error::NotFiniteSupport),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(
            self,
            DistributionSpec::Finite { .. }
                | DistributionSpec::Rademacher
                | DistributionSpec::PointCloud { .. }
        )
    }

    /// Dimension of real-vector points, if the law produces them.
    pub fn real_dim(&self) -> Option<usize> {
        match self {
            DistributionSpec::Finite { atoms } => match &atoms.first()?.point {
                Point::Real(v) => Some(v.len()),
                Point::Label(_) => None,
            },
            DistributionSpec::UniformCube { dim, .. } | DistributionSpec::Gaussian { dim } => {
                Some(*dim)
            }
            DistributionSpec::Rademacher => Some(1),
            DistributionSpec::PointCloud { points } => Some(points.first()?.len()),
        }
    }

    /// Draw one point. Deterministic function of the RNG stream.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Point {
        match self {
            DistributionSpec::Finite { .. }
            | DistributionSpec::Rademacher
            | DistributionSpec::PointCloud { .. } => {
                // The finite path is hot in MC loops; callers that care cache
                // the support. This convenience path rebuilds it.
                let support = self.finite_support().expect("validated finite law");
                support.atom(support.sample_index(rng)).clone()
            }
            DistributionSpec::UniformCube { dim, low, high } => {
                Point::Real((0..*dim).map(|_| rng.gen_range(*low..*high)).collect())
            }
            DistributionSpec::Gaussian { dim } => {
                Point::Real((0..*dim).map(|_| rng.sample(StandardNormal)).collect())
            }
        }
    }

    pub fn sample_row<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<Point> {
        match self.finite_support().ok() {
            Some(support) => (0..n)
                .map(|_| support.atom(support.sample_index(rng)).clone())
                .collect(),
            None => (0..n).map(|_| self.sample_point(rng)).collect(),
        }
    }
}

fn point_dim(p: &Point) -> Option<usize> {
    match p {
        Point::Real(v) => Some(v.len()),
        Point::Label(_) => None,
    }
}

/// Finite support with exact rational probabilities (normalized to sum 1).
#[derive(Debug, Clone)]
pub struct FiniteSupport {
    atoms: Vec<Point>,
    probs: Vec<BigRational>,
    cum: Vec<f64>,
}

impl FiniteSupport {
    fn from_atoms(atoms: &[Atom]) -> Result<FiniteSupport> {
        let raw: Vec<BigRational> = atoms.iter().map(|a| rational_of(a.prob)).collect();
        let total: BigRational = raw.iter().sum();
        if total.is_zero() {
            return Err(Error::InvalidSupport("zero total probability".into()));
        }
        let probs: Vec<BigRational> = raw.into_iter().map(|p| p / &total).collect();
        let points = atoms.iter().map(|a| a.point.clone()).collect();
        Ok(Self::assemble(points, probs))
    }

    fn uniform(points: Vec<Point>) -> Result<FiniteSupport> {
        if points.is_empty() {
            return Err(Error::InvalidSupport("empty support".into()));
        }
        let m = points.len();
        let probs = vec![
            BigRational::new(1.into(), (m as i64).into());
            m
        ];
        Ok(Self::assemble(points, probs))
    }

    fn assemble(atoms: Vec<Point>, probs: Vec<BigRational>) -> FiniteSupport {
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = BigRational::zero();
        for p in &probs {
            acc += p;
            cum.push(rational_to_f64(&acc));
        }
        // Guard against a rounding shortfall locking out the last atom.
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        FiniteSupport { atoms, probs, cum }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atom(&self, i: usize) -> &Point {
        &self.atoms[i]
    }

    pub fn prob(&self, i: usize) -> &BigRational {
        &self.probs[i]
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    /// True when all atoms carry the same probability.
    pub fn is_uniform(&self) -> bool {
        self.probs.iter().all(|p| p == &self.probs[0])
    }

    /// Inverse-CDF draw of an atom index.
    pub fn sample_index<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        match self.cum.iter().position(|&c| u < c) {
            Some(i) => i,
            None => self.atoms.len() - 1,
        }
    }
}

/// A c x n matrix of sample points; row j holds the j-th independent copy.
#[derive(Debug, Clone)]
pub struct SampleBlock {
    rows: Vec<Vec<Point>>,
}

impl SampleBlock {
    pub fn draw<R: Rng>(dist: &DistributionSpec, copies: usize, n: usize, rng: &mut R) -> Self {
        let rows = (0..copies).map(|_| dist.sample_row(n, rng)).collect();
        SampleBlock { rows }
    }

    pub fn from_rows(rows: Vec<Vec<Point>>) -> Result<Self> {
        if let Some(first) = rows.first() {
            for r in &rows {
                if r.len() != first.len() {
                    return Err(Error::RowLength { a: first.len(), b: r.len() });
                }
            }
        }
        Ok(SampleBlock { rows })
    }

    pub fn copies(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    pub fn row(&self, j: usize) -> &[Point] {
        &self.rows[j]
    }

    pub fn rows(&self) -> &[Vec<Point>] {
        &self.rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn finite_probs_must_sum_to_one() {
        let bad = DistributionSpec::Finite {
            atoms: vec![
                Atom { point: Point::scalar(0.0), prob: 0.5 },
                Atom { point: Point::scalar(1.0), prob: 0.4 },
            ],
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn weights_normalize_to_exact_rationals() {
        let d = DistributionSpec::finite_from_weights(
            vec![Point::scalar(0.0), Point::scalar(1.0), Point::scalar(2.0)],
            &[1, 1, 1],
        )
        .unwrap();
        let s = d.finite_support().unwrap();
        let third = BigRational::new(1.into(), 3.into());
        for i in 0..3 {
            assert_eq!(s.prob(i), &third);
        }
    }

    #[test]
    fn rademacher_has_finite_support() {
        let s = DistributionSpec::Rademacher.finite_support().unwrap();
        assert_eq!(s.len(), 2);
        assert!(s.is_uniform());
    }

    #[test]
    fn point_cloud_is_finite_uniform() {
        let d = DistributionSpec::PointCloud { points: vec![vec![0.0, 0.0], vec![1.0, 2.0]] };
        let s = d.finite_support().unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.atom(1), &Point::Real(vec![1.0, 2.0]));
    }

    #[test]
    fn generators_are_deterministic_in_the_seed() {
        let d = DistributionSpec::UniformCube { dim: 3, low: 0.0, high: 1.0 };
        let a = d.sample_row(5, &mut ChaCha8Rng::seed_from_u64(9));
        let b = d.sample_row(5, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn sample_block_shape() {
        let d = DistributionSpec::Rademacher;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let block = SampleBlock::draw(&d, 2, 4, &mut rng);
        assert_eq!(block.copies(), 2);
        assert_eq!(block.n(), 4);
    }

    #[test]
    fn finite_sampling_matches_probabilities_roughly() {
        let d = DistributionSpec::finite_from_weights(
            vec![Point::scalar(0.0), Point::scalar(1.0)],
            &[3, 1],
        )
        .unwrap();
        let s = d.finite_support().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut count0 = 0usize;
        for _ in 0..40_000 {
            if s.sample_index(&mut rng) == 0 {
                count0 += 1;
            }
        }
        let frac = count0 as f64 / 40_000.0;
        assert!((frac - 0.75).abs() < 0.01, "got {frac}");
    }
}

//! Kernel families f_{i1..ik}: indexed measurable maps from S^k into R^d.
//!
//! The built-in kinds cover the shapes the checks need: scalar products,
//! Euclidean distances, bivariate polynomials, and index-dependent lookup
//! tables over finite supports. Lookup tables with integer entries are the
//! workhorse for bit-exact identity checks. An opaque callback kind admits
//! anything else at the cost of JSON serializability.

use std::fmt;
use std::sync::Arc;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::dist::DistributionSpec;
use crate::model::value::{values_close, Point, VectorValue};

/// Nested lookup table: values[i][j][a][b] is the R^d value of f_{ij} at
/// atom pair (a, b).
pub type LookupTable = Vec<Vec<Vec<Vec<Vec<f64>>>>>;

/// JSON-facing description of a kernel family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub order: usize,
    pub n: usize,
    #[serde(default)]
    pub symmetric: bool,
    pub kind: KernelKindSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKindSpec {
    /// f(x_1..x_k) = x_1 * ... * x_k on scalar points.
    Product,
    /// f(x, y) = Euclidean distance, k = 2.
    Distance,
    /// f(x, y) = sum_{p,q} coeffs[p][q] x^p y^q on scalar points, k = 2.
    Polynomial { coeffs: Vec<Vec<f64>> },
    /// Index-dependent table over label points, k = 2.
    Lookup { support: usize, dim: usize, values: LookupTable },
    /// Average of the inner kernel over all argument/index permutations.
    Symmetrized { inner: Box<KernelKindSpec> },
}

/// A kernel family ready to evaluate.
#[derive(Clone)]
pub struct KernelFamily {
    order: usize,
    n: usize,
    symmetric: bool,
    dim: usize,
    kind: KernelKind,
    spec: Option<KernelSpec>,
}

#[derive(Clone)]
enum KernelKind {
    Product,
    Distance,
    Polynomial { coeffs: Vec<Vec<f64>> },
    Lookup { support: usize, dim: usize, values: LookupTable },
    Symmetrized(Box<KernelFamily>),
    Callback {
        dim: usize,
        f: Arc<dyn Fn(&[usize], &[&Point]) -> Result<VectorValue> + Send + Sync>,
    },
}

impl fmt::Debug for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            KernelKind::Product => "product",
            KernelKind::Distance => "distance",
            KernelKind::Polynomial { .. } => "polynomial",
            KernelKind::Lookup { .. } => "lookup",
            KernelKind::Symmetrized(_) => "symmetrized",
            KernelKind::Callback { .. } => "callback",
        };
        f.debug_struct("KernelFamily")
            .field("order", &self.order)
            .field("n", &self.n)
            .field("symmetric", &self.symmetric)
            .field("dim", &self.dim)
            .field("kind", &kind)
            .finish()
    }
}

impl KernelFamily {
    pub fn from_spec(spec: &KernelSpec) -> Result<KernelFamily> {
        if spec.order == 0 {
            return Err(Error::KernelDomain("order k must be >= 1".into()));
        }
        let kind = build_kind(spec.order, spec.n, &spec.kind)?;
        let dim = kind_dim(&kind);
        Ok(KernelFamily {
            order: spec.order,
            n: spec.n,
            symmetric: spec.symmetric,
            dim,
            kind,
            spec: Some(spec.clone()),
        })
    }

    pub fn product(n: usize, order: usize) -> KernelFamily {
        KernelFamily {
            order,
            n,
            symmetric: true,
            dim: 1,
            kind: KernelKind::Product,
            spec: Some(KernelSpec { order, n, symmetric: true, kind: KernelKindSpec::Product }),
        }
    }

    pub fn distance(n: usize) -> KernelFamily {
        KernelFamily {
            order: 2,
            n,
            symmetric: true,
            dim: 1,
            kind: KernelKind::Distance,
            spec: Some(KernelSpec {
                order: 2,
                n,
                symmetric: true,
                kind: KernelKindSpec::Distance,
            }),
        }
    }

    pub fn polynomial(n: usize, coeffs: Vec<Vec<f64>>, symmetric: bool) -> KernelFamily {
        let spec = KernelSpec {
            order: 2,
            n,
            symmetric,
            kind: KernelKindSpec::Polynomial { coeffs: coeffs.clone() },
        };
        KernelFamily {
            order: 2,
            n,
            symmetric,
            dim: 1,
            kind: KernelKind::Polynomial { coeffs },
            spec: Some(spec),
        }
    }

    /// Constant kernel c (k = 2), as the degree-(0,0) polynomial.
    pub fn constant(n: usize, c: f64) -> KernelFamily {
        Self::polynomial(n, vec![vec![c]], true)
    }

    pub fn lookup(n: usize, support: usize, dim: usize, values: LookupTable) -> Result<KernelFamily> {
        validate_lookup(n, support, dim, &values)?;
        let spec = KernelSpec {
            order: 2,
            n,
            symmetric: false,
            kind: KernelKindSpec::Lookup { support, dim, values: values.clone() },
        };
        Ok(KernelFamily {
            order: 2,
            n,
            symmetric: false,
            dim,
            kind: KernelKind::Lookup { support, dim, values },
            spec: Some(spec),
        })
    }

    pub fn lookup_from_fn(
        n: usize,
        support: usize,
        dim: usize,
        f: impl Fn(usize, usize, usize, usize) -> Vec<f64>,
    ) -> Result<KernelFamily> {
        let values: LookupTable = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..support)
                            .map(|a| (0..support).map(|b| f(i, j, a, b)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::lookup(n, support, dim, values)
    }

    pub fn callback(
        n: usize,
        order: usize,
        dim: usize,
        symmetric: bool,
        f: impl Fn(&[usize], &[&Point]) -> Result<VectorValue> + Send + Sync + 'static,
    ) -> KernelFamily {
        KernelFamily {
            order,
            n,
            symmetric,
            dim,
            kind: KernelKind::Callback { dim, f: Arc::new(f) },
            spec: None,
        }
    }

    /// Average of this kernel over all k! permutations of (index, argument)
    /// orderings; the result satisfies the permutation hypothesis.
    pub fn symmetrized(self) -> KernelFamily {
        let spec = self.spec.as_ref().map(|s| KernelSpec {
            order: s.order,
            n: s.n,
            symmetric: true,
            kind: KernelKindSpec::Symmetrized { inner: Box::new(s.kind.clone()) },
        });
        KernelFamily {
            order: self.order,
            n: self.n,
            symmetric: true,
            dim: self.dim,
            kind: KernelKind::Symmetrized(Box::new(self)),
            spec,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn declared_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn spec(&self) -> Option<&KernelSpec> {
        self.spec.as_ref()
    }

    /// Evaluate f_{indices}(points).
    pub fn eval(&self, indices: &[usize], points: &[&Point]) -> Result<VectorValue> {
        if indices.len() != self.order || points.len() != self.order {
            return Err(Error::KernelArity {
                order: self.order,
                got: indices.len().max(points.len()),
            });
        }
        for &i in indices {
            if i >= self.n {
                return Err(Error::KernelIndexRange { index: i, n: self.n });
            }
        }
        match &self.kind {
            KernelKind::Product => {
                let mut prod = 1.0;
                for p in points {
                    let r = p.as_real()?;
                    if r.len() != 1 {
                        return Err(Error::KernelDomain(
                            "product kernel needs scalar points".into(),
                        ));
                    }
                    prod *= r[0];
                }
                Ok(VectorValue::from_raw(vec![prod]))
            }
            KernelKind::Distance => {
                let a = points[0].as_real()?;
                let b = points[1].as_real()?;
                if a.len() != b.len() {
                    return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
                }
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                Ok(VectorValue::from_raw(vec![d2.sqrt()]))
            }
            KernelKind::Polynomial { coeffs } => {
                let x = scalar_point(points[0])?;
                let y = scalar_point(points[1])?;
                let mut acc = 0.0;
                let mut xp = 1.0;
                for row in coeffs {
                    let mut yq = 1.0;
                    for &c in row {
                        acc += c * xp * yq;
                        yq *= y;
                    }
                    xp *= x;
                }
                Ok(VectorValue::from_raw(vec![acc]))
            }
            KernelKind::Lookup { support, values, .. } => {
                let a = points[0].as_label()? as usize;
                let b = points[1].as_label()? as usize;
                if a >= *support || b >= *support {
                    return Err(Error::KernelDomain(format!(
                        "label ({a}, {b}) outside lookup support {support}"
                    )));
                }
                Ok(VectorValue::from_raw(values[indices[0]][indices[1]][a][b].clone()))
            }
            KernelKind::Symmetrized(inner) => {
                let k = self.order;
                let mut sum = VectorValue::zero(self.dim);
                let mut perm_idx = vec![0usize; k];
                let mut perm_pts: Vec<&Point> = Vec::with_capacity(k);
                for perm in (0..k).permutations(k) {
                    perm_pts.clear();
                    for (slot, &src) in perm.iter().enumerate() {
                        perm_idx[slot] = indices[src];
                        perm_pts.push(points[src]);
                    }
                    sum.add_assign(&inner.eval(&perm_idx, &perm_pts)?)?;
                }
                let fact: usize = (1..=k).product();
                Ok(sum.scale(1.0 / fact as f64))
            }
            KernelKind::Callback { f, .. } => f(indices, points),
        }
    }

    /// Convenience for owned point slices.
    pub fn eval_points(&self, indices: &[usize], points: &[Point]) -> Result<VectorValue> {
        let refs: Vec<&Point> = points.iter().collect();
        self.eval(indices, &refs)
    }
}

fn scalar_point(p: &Point) -> Result<f64> {
    let r = p.as_real()?;
    if r.len() != 1 {
        return Err(Error::KernelDomain("polynomial kernel needs scalar points".into()));
    }
    Ok(r[0])
}

fn build_kind(order: usize, n: usize, spec: &KernelKindSpec) -> Result<KernelKind> {
    match spec {
        KernelKindSpec::Product => Ok(KernelKind::Product),
        KernelKindSpec::Distance => {
            require_order2(order, "distance")?;
            Ok(KernelKind::Distance)
        }
        KernelKindSpec::Polynomial { coeffs } => {
            require_order2(order, "polynomial")?;
            Ok(KernelKind::Polynomial { coeffs: coeffs.clone() })
        }
        KernelKindSpec::Lookup { support, dim, values } => {
            require_order2(order, "lookup")?;
            validate_lookup(n, *support, *dim, values)?;
            Ok(KernelKind::Lookup { support: *support, dim: *dim, values: values.clone() })
        }
        KernelKindSpec::Symmetrized { inner } => {
            let inner_kind = build_kind(order, n, inner)?;
            let dim = kind_dim(&inner_kind);
            Ok(KernelKind::Symmetrized(Box::new(KernelFamily {
                order,
                n,
                symmetric: false,
                dim,
                kind: inner_kind,
                spec: None,
            })))
        }
    }
}

fn require_order2(order: usize, kind: &str) -> Result<()> {
    if order != 2 {
        return Err(Error::KernelDomain(format!("{kind} kernel requires k = 2, got k = {order}")));
    }
    Ok(())
}

fn kind_dim(kind: &KernelKind) -> usize {
    match kind {
        KernelKind::Product | KernelKind::Distance | KernelKind::Polynomial { .. } => 1,
        KernelKind::Lookup { dim, .. } => *dim,
        KernelKind::Symmetrized(inner) => inner.dim,
        KernelKind::Callback { dim, .. } => *dim,
    }
}

fn validate_lookup(n: usize, support: usize, dim: usize, values: &LookupTable) -> Result<()> {
    if support == 0 || dim == 0 {
        return Err(Error::KernelDomain("lookup needs support >= 1 and dim >= 1".into()));
    }
    if values.len() != n {
        return Err(Error::KernelDomain(format!(
            "lookup table has {} index rows, expected n = {n}",
            values.len()
        )));
    }
    for row in values {
        if row.len() != n {
            return Err(Error::KernelDomain("lookup table is not n x n".into()));
        }
        for cell in row {
            if cell.len() != support || cell.iter().any(|c| c.len() != support) {
                return Err(Error::KernelDomain("lookup cell is not support x support".into()));
            }
            for col in cell {
                for v in col {
                    if v.len() != dim {
                        return Err(Error::KernelDomain(format!(
                            "lookup value has dim {}, expected {dim}",
                            v.len()
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Outcome of the permutation-symmetry check.
#[derive(Debug, Clone)]
pub enum SymmetryVerdict {
    Symmetric,
    Counterexample {
        indices: Vec<usize>,
        points: Vec<Point>,
        permutation: Vec<usize>,
        lhs: VectorValue,
        rhs: VectorValue,
    },
}

impl SymmetryVerdict {
    pub fn is_symmetric(&self) -> bool {
        matches!(self, SymmetryVerdict::Symmetric)
    }
}

/// Check f_{i1..ik}(s1..sk) = f_{i_pi(1)..i_pi(k)}(s_pi(1)..s_pi(k)) for all
/// permutations pi, on `trials` sampled (index tuple, point tuple) pairs.
/// Points are drawn from `dist`; indices uniformly among distinct tuples.
pub fn check_kernel_symmetry(
    kernel: &KernelFamily,
    dist: &DistributionSpec,
    trials: usize,
    rng_seed: u64,
) -> Result<SymmetryVerdict> {
    let k = kernel.order();
    let n = kernel.n();
    if n < k {
        return Ok(SymmetryVerdict::Symmetric); // no admissible tuples
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..trials {
        let indices = sample_distinct(&mut rng, n, k);
        let points: Vec<Point> = (0..k).map(|_| dist.sample_point(&mut rng)).collect();
        let refs: Vec<&Point> = points.iter().collect();
        let base = kernel.eval(&indices, &refs)?;
        for perm in (0..k).permutations(k) {
            let p_idx: Vec<usize> = perm.iter().map(|&s| indices[s]).collect();
            let p_pts: Vec<&Point> = perm.iter().map(|&s| refs[s]).collect();
            let permuted = kernel.eval(&p_idx, &p_pts)?;
            if !values_close(&base, &permuted, 1e-12) {
                return Ok(SymmetryVerdict::Counterexample {
                    indices,
                    points,
                    permutation: perm,
                    lhs: base,
                    rhs: permuted,
                });
            }
        }
    }
    Ok(SymmetryVerdict::Symmetric)
}

fn sample_distinct<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut picked = Vec::with_capacity(k);
    while picked.len() < k {
        let cand = rng.gen_range(0..n);
        if !picked.contains(&cand) {
            picked.push(cand);
        }
    }
    picked
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_points(xs: &[f64]) -> Vec<Point> {
        xs.iter().map(|&x| Point::scalar(x)).collect()
    }

    #[test]
    fn product_kernel_is_symmetric() {
        let k = KernelFamily::product(5, 2);
        let verdict =
            check_kernel_symmetry(&k, &DistributionSpec::Gaussian { dim: 1 }, 200, 42).unwrap();
        assert!(verdict.is_symmetric());
    }

    #[test]
    fn antisymmetric_kernel_yields_counterexample() {
        // f(x, y) = x - y
        let k = KernelFamily::polynomial(5, vec![vec![0.0, -1.0], vec![1.0]], false);
        let pts = scalar_points(&[1.0, 2.0]);
        let got = k.eval_points(&[0, 1], &pts).unwrap();
        assert_eq!(got.coords(), &[-1.0]);
        let verdict =
            check_kernel_symmetry(&k, &DistributionSpec::Gaussian { dim: 1 }, 50, 7).unwrap();
        match verdict {
            SymmetryVerdict::Counterexample { permutation, .. } => {
                assert_eq!(permutation, vec![1, 0]);
            }
            SymmetryVerdict::Symmetric => panic!("x - y should fail the symmetry check"),
        }
    }

    #[test]
    fn distance_kernel_is_symmetric() {
        let k = KernelFamily::distance(4);
        let verdict =
            check_kernel_symmetry(&k, &DistributionSpec::Gaussian { dim: 3 }, 200, 3).unwrap();
        assert!(verdict.is_symmetric());
    }

    #[test]
    fn lookup_eval_and_bounds() {
        let k = KernelFamily::lookup_from_fn(3, 2, 1, |i, j, a, b| {
            vec![(i * 27 + j * 9 + a * 3 + b) as f64]
        })
        .unwrap();
        let p = vec![Point::Label(1), Point::Label(0)];
        let got = k.eval_points(&[2, 0], &p).unwrap();
        assert_eq!(got.coords(), &[(2 * 27 + 0 + 3 + 0) as f64]);
        assert!(k.eval_points(&[2, 0], &[Point::Label(5), Point::Label(0)]).is_err());
        assert!(k.eval_points(&[3, 0], &p).is_err());
    }

    #[test]
    fn symmetrized_of_projection_is_average() {
        // f(x, y) = x symmetrizes to (x + y) / 2.
        let proj = KernelFamily::polynomial(4, vec![vec![0.0], vec![1.0]], false);
        let sym = proj.symmetrized();
        let pts = scalar_points(&[3.0, 7.0]);
        let got = sym.eval_points(&[0, 1], &pts).unwrap();
        assert_eq!(got.coords(), &[5.0]);
        let verdict =
            check_kernel_symmetry(&sym, &DistributionSpec::Gaussian { dim: 1 }, 100, 11).unwrap();
        assert!(verdict.is_symmetric());
    }

    #[test]
    fn symmetrized_of_antisymmetric_is_zero() {
        let anti = KernelFamily::polynomial(4, vec![vec![0.0, -1.0], vec![1.0]], false);
        let sym = anti.symmetrized();
        let pts = scalar_points(&[2.0, 9.0]);
        let got = sym.eval_points(&[1, 3], &pts).unwrap();
        assert_eq!(got.coords(), &[0.0]);
    }

    #[test]
    fn spec_roundtrip_builds_equal_kernel() {
        let spec = KernelSpec {
            order: 2,
            n: 3,
            symmetric: true,
            kind: KernelKindSpec::Polynomial { coeffs: vec![vec![0.0, 0.0], vec![0.0, 1.0]] },
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: KernelSpec = serde_json::from_str(&json).unwrap();
        let k = KernelFamily::from_spec(&back).unwrap();
        let pts = scalar_points(&[2.0, 5.0]);
        assert_eq!(k.eval_points(&[0, 1], &pts).unwrap().coords(), &[10.0]);
    }
}

//! Values, sample points, and sign vectors.
//!
//! A `VectorValue` is an element of R^d standing in for the normed space the
//! kernels map into. A `Point` is a sample-space element: either a real vector
//! or an abstract label that only a lookup-table kernel knows how to interpret.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element of R^d. Coordinates are finite; `-0.0` is normalized to `0.0` so
/// that bitwise comparisons of exact integer arithmetic behave as set equality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorValue(Vec<f64>);

impl VectorValue {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        for (i, &c) in coords.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite { index: i, value: c });
            }
        }
        Ok(Self::from_raw(coords))
    }

    /// Internal constructor for arithmetic results; normalizes signed zeros.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        VectorValue(
            coords
                .into_iter()
                .map(|c| if c == 0.0 { 0.0 } else { c })
                .collect(),
        )
    }

    pub fn scalar(x: f64) -> Result<Self> {
        Self::new(vec![x])
    }

    pub fn zero(dim: usize) -> Self {
        VectorValue(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn add_assign(&mut self, other: &VectorValue) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a += b;
            if *a == 0.0 {
                *a = 0.0; // normalize -0.0 produced by cancellation
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &VectorValue) -> Result<VectorValue> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> VectorValue {
        VectorValue::from_raw(self.0.iter().map(|c| c * factor).collect())
    }

    /// True when every coordinate is an integer small enough for f64
    /// arithmetic on it to be exact.
    pub fn is_integral(&self) -> bool {
        self.0
            .iter()
            .all(|c| c.fract() == 0.0 && c.abs() < 2f64.powi(52))
    }

    /// Bit pattern key for exact deduplication in law maps.
    pub(crate) fn bits_key(&self) -> Vec<u64> {
        self.0.iter().map(|c| c.to_bits()).collect()
    }
}

/// Sample-space element: a point of S.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Point {
    /// A point of R^m.
    Real(Vec<f64>),
    /// An abstract label, resolved by a lookup-table kernel.
    Label(u32),
}

impl Point {
    pub fn scalar(x: f64) -> Point {
        Point::Real(vec![x])
    }

    pub fn as_real(&self) -> Result<&[f64]> {
        match self {
            Point::Real(v) => Ok(v),
            Point::Label(_) => Err(Error::KernelDomain(
                "expected a real-vector point, got a label".into(),
            )),
        }
    }

    pub fn as_label(&self) -> Result<u32> {
        match self {
            Point::Label(l) => Ok(*l),
            Point::Real(_) => Err(Error::KernelDomain(
                "expected a label point, got a real vector".into(),
            )),
        }
    }
}

/// A vector of n signs, each -1 or +1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        for (i, &s) in signs.iter().enumerate() {
            if s != 1 && s != -1 {
                return Err(Error::InvalidSign { index: i, value: s });
            }
        }
        Ok(SignVector(signs))
    }

    /// Pattern `mask` interpreted bitwise: bit i set means eps_i = +1.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        SignVector((0..n).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn all_plus(n: usize) -> Self {
        SignVector(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn flipped(&self) -> SignVector {
        SignVector(self.0.iter().map(|s| -s).collect())
    }
}

/// Relative comparison used for float-valued kernels; integer-valued kernels
/// compare bit-exactly before this ever matters.
pub fn values_close(a: &VectorValue, b: &VectorValue, rel_tol: f64) -> bool {
    if a.dim() != b.dim() {
        return false;
    }
    a.coords().iter().zip(b.coords()).all(|(&x, &y)| {
        let scale = 1f64.max(x.abs()).max(y.abs());
        (x - y).abs() <= rel_tol * scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        assert!(VectorValue::new(vec![1.0, f64::NAN]).is_err());
        assert!(VectorValue::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn normalizes_negative_zero() {
        let v = VectorValue::new(vec![-0.0]).unwrap();
        assert_eq!(v.coords()[0].to_bits(), 0f64.to_bits());
    }

    #[test]
    fn sign_vector_validates_entries() {
        assert!(SignVector::new(vec![1, -1, 1]).is_ok());
        assert!(SignVector::new(vec![1, 0]).is_err());
    }

    #[test]
    fn sign_vector_mask_roundtrip() {
        let s = SignVector::from_mask(0b101, 3);
        assert_eq!(s.signs(), &[1, -1, 1]);
    }
}

use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};

/// A point or direction in ℝⁿ with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct VecN(Vec<f64>);

impl VecN {
    /// Validating constructor: at least one coordinate, all finite.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("vector must have dim >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { point: coords });
        }
        Ok(VecN(coords))
    }

    /// Wraps coordinates produced by arithmetic on already-valid vectors.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        VecN(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        VecN(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        VecN(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &VecN) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(&self, other: &VecN) -> f64 {
        (self - other).norm()
    }

    /// Largest absolute coordinate.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `self + k * other`.
    pub fn axpy(&self, k: f64, other: &VecN) -> VecN {
        debug_assert_eq!(self.dim(), other.dim());
        VecN(self.0.iter().zip(&other.0).map(|(a, b)| a + k * b).collect())
    }

    pub fn scaled(&self, k: f64) -> VecN {
        VecN(self.0.iter().map(|c| c * k).collect())
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<VecN> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self.scaled(1.0 / n))
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }
}

impl Index<usize> for VecN {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<VecN> for Vec<f64> {
    fn from(v: VecN) -> Self {
        v.0
    }
}

impl TryFrom<Vec<f64>> for VecN {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        VecN::new(v)
    }
}

impl Add for &VecN {
    type Output = VecN;

    fn add(self, rhs: &VecN) -> VecN {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &VecN {
    type Output = VecN;

    fn sub(self, rhs: &VecN) -> VecN {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &VecN {
    type Output = VecN;

    fn mul(self, k: f64) -> VecN {
        self.scaled(k)
    }
}

impl Neg for &VecN {
    type Output = VecN;

    fn neg(self) -> VecN {
        self.scaled(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(VecN::new(vec![]).is_err());
        assert!(matches!(
            VecN::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { .. })
        ));
        assert!(VecN::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = VecN::new(vec![3.0, 4.0]).unwrap();
        let b = VecN::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(a.norm(), 5.0);
        assert_eq!(a.dot(&b), -1.0);
        assert_eq!((&a - &b).as_slice(), &[2.0, 5.0]);
        assert_eq!((&a + &b).as_slice(), &[4.0, 3.0]);
        assert_eq!((&a * 2.0).as_slice(), &[6.0, 8.0]);
        let n = a.normalized().unwrap();
        assert!((n[0] - 0.6).abs() < 1e-15 && (n[1] - 0.8).abs() < 1e-15);
        assert!(VecN::zeros(3).normalized().is_none());
    }
}

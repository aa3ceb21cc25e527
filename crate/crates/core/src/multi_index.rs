//! Multi-indices in `{0,1}^n`, stored as a single machine word.
//!
//! Positions are 0-based internally. The serialized form is the plain 0/1
//! vector, so position `k` of the JSON array is coordinate `x_{k+1}`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported ambient dimension; multi-indices are `u64` bitmasks.
pub const MAX_DIM: usize = 64;
/// Smallest supported ambient dimension (the sphere `S^{n-1}` with `n >= 3`).
pub const MIN_DIM: usize = 3;

pub(crate) fn check_dimension(n: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(n))
    }
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    n: u8,
    bits: u64,
}

impl MultiIndex {
    pub fn from_mask(n: usize, bits: u64) -> Result<Self> {
        check_dimension(n)?;
        if bits & !full_mask(n) != 0 {
            return Err(Error::InvalidMultiIndex(format!(
                "mask {bits:#x} has bits beyond n={n}"
            )));
        }
        Ok(Self { n: n as u8, bits })
    }

    /// Builds a multi-index from 0-based positions.
    pub fn from_positions(n: usize, positions: impl IntoIterator<Item = usize>) -> Result<Self> {
        check_dimension(n)?;
        let mut bits = 0u64;
        for p in positions {
            if p >= n {
                return Err(Error::InvalidMultiIndex(format!("position {p} out of range for n={n}")));
            }
            bits |= 1 << p;
        }
        Ok(Self { n: n as u8, bits })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_dimension(bits.len())?;
        let mut mask = 0u64;
        for (k, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => mask |= 1 << k,
                other => {
                    return Err(Error::InvalidMultiIndex(format!(
                        "entry {k} is {other}, expected 0 or 1"
                    )))
                }
            }
        }
        Ok(Self { n: bits.len() as u8, bits: mask })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_mask(n, 0)
    }

    pub fn ones(n: usize) -> Result<Self> {
        Self::from_mask(n, full_mask(n))
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u64 {
        self.bits
    }

    /// `|α|`, the number of ones.
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(&self, position: usize) -> bool {
        position < self.n() && self.bits >> position & 1 == 1
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&k| self.contains(k))
    }

    /// Smallest 0-based position with a one, if any.
    pub fn first(&self) -> Option<usize> {
        (self.bits != 0).then(|| self.bits.trailing_zeros() as usize)
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.n()).map(|k| u8::from(self.contains(k))).collect()
    }

    /// `ᾱ = (1,…,1) − α`.
    pub fn complement(&self) -> Self {
        Self { n: self.n, bits: !self.bits & full_mask(self.n()) }
    }

    pub fn orthogonal(&self, other: &Self) -> Result<bool> {
        self.same_dim(other)?;
        Ok(self.bits & other.bits == 0)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(Self { n: self.n, bits: self.bits | other.bits })
    }

    /// Componentwise `self − other`; fails if an entry would become negative.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        if other.bits & !self.bits != 0 {
            return Err(Error::InvalidMultiIndex(format!(
                "{other} is not contained in {self}; difference has negative entries"
            )));
        }
        Ok(Self { n: self.n, bits: self.bits & !other.bits })
    }

    /// Squared Euclidean norm `|x_α|²` of the selected sub-vector.
    pub fn norm_sq(&self, x: &[f64]) -> f64 {
        self.positions().map(|k| x[k] * x[k]).sum()
    }

    /// Copies `x_α` into a vector of length `|α|`.
    pub fn select(&self, x: &[f64]) -> Vec<f64> {
        self.positions().map(|k| x[k]).collect()
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.n(), found: other.n() })
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for k in 0..self.n() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", u8::from(self.contains(k)))?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_bits().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let bits = Vec::<u8>::deserialize(d)?;
        MultiIndex::from_bits(&bits).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(bits: &[u8]) -> MultiIndex {
        MultiIndex::from_bits(bits).unwrap()
    }

    #[test]
    fn orthogonality() {
        assert!(mi(&[1, 1, 0, 0]).orthogonal(&mi(&[0, 0, 1, 1])).unwrap());
        assert!(!mi(&[1, 1, 0, 0]).orthogonal(&mi(&[0, 1, 1, 0])).unwrap());
        let a = mi(&[1, 0, 1, 1, 0]);
        assert!(a.orthogonal(&a.complement()).unwrap());
    }

    #[test]
    fn orthogonality_dimension_mismatch() {
        let err = mi(&[1, 1, 0]).orthogonal(&mi(&[1, 1, 0, 0])).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, found: 4 });
    }

    #[test]
    fn complement_examples() {
        assert_eq!(mi(&[1, 0, 1, 0]).complement(), mi(&[0, 1, 0, 1]));
        assert_eq!(MultiIndex::ones(5).unwrap().complement(), MultiIndex::zeros(5).unwrap());
        let a = mi(&[0, 1, 1, 0, 1, 0]);
        assert_eq!(a.complement().complement(), a);
    }

    #[test]
    fn full_width_mask() {
        let all = MultiIndex::ones(64).unwrap();
        assert_eq!(all.weight(), 64);
        assert_eq!(all.complement().weight(), 0);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(MultiIndex::from_bits(&[1, 2, 0]).is_err());
        assert!(MultiIndex::from_bits(&[1, 0]).is_err());
        assert!(MultiIndex::from_mask(3, 0b1000).is_err());
    }

    #[test]
    fn minus_requires_containment() {
        let a = mi(&[1, 1, 1, 0]);
        assert_eq!(a.minus(&mi(&[0, 1, 0, 0])).unwrap(), mi(&[1, 0, 1, 0]));
        assert!(a.minus(&mi(&[0, 0, 0, 1])).is_err());
    }

    #[test]
    fn json_is_bit_vector() {
        let a = mi(&[1, 0, 1]);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[1,0,1]");
        let back: MultiIndex = serde_json::from_str("[1,0,1]").unwrap();
        assert_eq!(back, a);
    }
}

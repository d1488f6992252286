//! Fixed-width site vectors.
//!
//! Every layer in the model has exactly one unit per stimulation site, so all
//! activity, target and input patterns are length-10 vectors. Sites are
//! numbered 1..=10 at the API boundary; storage is 0-based.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Sub};

use serde::{Deserialize, Serialize};

/// Number of stimulation sites (and units per layer).
pub const SITES: usize = 10;

/// Row-major 10x10 matrix: `m[r][c]` is output unit `r`, input unit `c`.
pub type Matrix = [[f64; SITES]; SITES];

pub const ZERO_MATRIX: Matrix = [[0.0; SITES]; SITES];

/// A length-10 pattern over stimulation sites.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteVector(pub [f64; SITES]);

impl SiteVector {
    pub const fn zeros() -> Self {
        SiteVector([0.0; SITES])
    }

    pub const fn splat(v: f64) -> Self {
        SiteVector([v; SITES])
    }

    /// Binary pattern with ones at the given 1-based sites.
    ///
    /// Panics if a site lies outside 1..=10.
    pub fn from_sites(sites: &[usize]) -> Self {
        let mut v = Self::zeros();
        for &s in sites {
            v[s] = 1.0;
        }
        v
    }

    pub fn one_hot(site: usize) -> Self {
        Self::from_sites(&[site])
    }

    pub fn as_array(&self) -> &[f64; SITES] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    /// `(site, value)` pairs with 1-based site numbers.
    pub fn sites(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0.iter().enumerate().map(|(i, &v)| (i + 1, v))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        SiteVector(self.0.map(f))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Largest entry and its 1-based site; first site wins ties.
    pub fn argmax(&self) -> (usize, f64) {
        let mut best = (1, self.0[0]);
        for (s, v) in self.sites().skip(1) {
            if v > best.1 {
                best = (s, v);
            }
        }
        best
    }
}

impl Default for SiteVector {
    fn default() -> Self {
        Self::zeros()
    }
}

impl From<[f64; SITES]> for SiteVector {
    fn from(v: [f64; SITES]) -> Self {
        SiteVector(v)
    }
}

/// 1-based site access.
impl Index<usize> for SiteVector {
    type Output = f64;

    fn index(&self, site: usize) -> &f64 {
        assert!(
            (1..=SITES).contains(&site),
            "site {site} outside 1..={SITES}"
        );
        &self.0[site - 1]
    }
}

impl IndexMut<usize> for SiteVector {
    fn index_mut(&mut self, site: usize) -> &mut f64 {
        assert!(
            (1..=SITES).contains(&site),
            "site {site} outside 1..={SITES}"
        );
        &mut self.0[site - 1]
    }
}

impl Add for SiteVector {
    type Output = SiteVector;

    fn add(self, rhs: SiteVector) -> SiteVector {
        SiteVector(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for SiteVector {
    type Output = SiteVector;

    fn sub(self, rhs: SiteVector) -> SiteVector {
        SiteVector(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl fmt::Display for SiteVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v:.4}")?;
        }
        write!(f, "]")
    }
}

/// `m · x`.
pub fn mat_vec(m: &Matrix, x: &SiteVector) -> SiteVector {
    SiteVector(std::array::from_fn(|r| {
        m[r].iter().zip(x.0.iter()).map(|(w, v)| w * v).sum()
    }))
}

pub fn transpose(m: &Matrix) -> Matrix {
    std::array::from_fn(|r| std::array::from_fn(|c| m[c][r]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_based_indexing() {
        let v = SiteVector::from_sites(&[8, 9]);
        assert_eq!(v[8], 1.0);
        assert_eq!(v[9], 1.0);
        assert_eq!(v.0[7], 1.0);
        assert_eq!(v.iter().sum::<f64>(), 2.0);
    }

    #[test]
    #[should_panic]
    fn site_zero_is_rejected() {
        let _ = SiteVector::one_hot(0);
    }

    #[test]
    fn mat_vec_identity() {
        let mut m = ZERO_MATRIX;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 2.0;
        }
        let x = SiteVector::one_hot(3);
        assert_eq!(
            mat_vec(&m, &x),
            SiteVector::from_sites(&[3]).map(|v| 2.0 * v)
        );
    }

    #[test]
    fn argmax_prefers_first() {
        let v = SiteVector::from_sites(&[4, 6]);
        assert_eq!(v.argmax(), (4, 1.0));
    }
}

//! Points, directions and multi-indices of the unit polydisk, together with
//! the product Bergman metric and the coordinate-interpolation paths.
//!
//! Points serialize as JSON arrays of `[re, im]` pairs.

use std::fmt;
use std::ops::Deref;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{BlochError, Result};

/// Absolute tolerance used for closed-polydisk comparisons.
pub const EPS_MACH: f64 = 1e-12;

/// `1 - |z|^2`, the one-variable boundary weight, factored as
/// `(1 - |z|)(1 + |z|)` to keep relative accuracy near the circle.
#[inline]
pub fn disk_weight(z: Complex64) -> f64 {
    let r = z.norm();
    (1.0 - r) * (1.0 + r)
}

/// A point of the open polydisk: every coordinate has modulus strictly below 1.
#[derive(Clone, Debug, PartialEq)]
pub struct PolydiskPoint {
    coords: Vec<Complex64>,
}

impl PolydiskPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(BlochError::InvalidParameter("dimension must be at least 1".into()));
        }
        for (index, c) in coords.iter().enumerate() {
            let modulus = c.norm();
            if !(modulus < 1.0) {
                return Err(BlochError::OutsidePolydisk { index, modulus });
            }
        }
        Ok(Self { coords })
    }

    /// Builds a point from `(re, im)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    /// Builds a point with real coordinates.
    pub fn from_reals(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn origin(n: usize) -> Self {
        assert!(n >= 1, "dimension must be at least 1");
        Self { coords: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Complex64> {
        self.coords
    }

    pub fn to_closed(&self) -> ClosedPoint {
        ClosedPoint { coords: self.coords.clone() }
    }
}

impl Deref for PolydiskPoint {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.coords
    }
}

impl fmt::Display for PolydiskPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_coords(&self.coords, f)
    }
}

/// A point of the closed polydisk (`|z_k| <= 1`), used for boundary values of
/// functions that extend continuously.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedPoint {
    coords: Vec<Complex64>,
}

impl ClosedPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(BlochError::InvalidParameter("dimension must be at least 1".into()));
        }
        for (index, c) in coords.iter().enumerate() {
            let modulus = c.norm();
            if !(modulus <= 1.0 + EPS_MACH) {
                return Err(BlochError::OutsidePolydisk { index, modulus });
            }
        }
        Ok(Self { coords })
    }

    pub fn from_reals(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|c| c.norm() < 1.0)
    }

    pub fn into_interior(self) -> Result<PolydiskPoint> {
        PolydiskPoint::new(self.coords)
    }
}

impl Deref for ClosedPoint {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.coords
    }
}

/// A tangent vector `u` in `C^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Direction {
    pub components: Vec<Complex64>,
}

impl Direction {
    pub fn new(components: Vec<Complex64>) -> Self {
        Self { components }
    }

    pub fn zero(n: usize) -> Self {
        Self { components: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        Self { components: self.components.iter().map(|u| u * lambda).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|u| u.norm_sqr() == 0.0)
    }
}

impl Deref for Direction {
    type Target = [Complex64];

    fn deref(&self) -> &[Complex64] {
        &self.components
    }
}

/// An n-multi-index `γ`; `z^γ = z_1^{γ_1} ... z_n^{γ_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The multi-index with a single 1 in position `k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Evaluates the monomial `z^γ`.
    pub fn monomial(&self, z: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(z)
            .fold(Complex64::new(1.0, 0.0), |acc, (&e, &zk)| acc * zk.powu(e))
    }

    /// All multi-indices of dimension `n` with degree at most `max_degree`,
    /// in graded lexicographic order.
    pub fn all_up_to(n: usize, max_degree: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            let mut current = vec![0u32; n];
            push_with_degree(&mut out, &mut current, 0, d as u32);
        }
        out
    }
}

fn push_with_degree(out: &mut Vec<MultiIndex>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        push_with_degree(out, current, pos + 1, remaining - e);
    }
    current[pos] = 0;
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(BlochError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// The Bergman metric of the polydisk, `H(z,u) = Σ_k |u_k|^2 / (1-|z_k|^2)^2`.
pub fn bergman_metric(z: &PolydiskPoint, u: &Direction) -> Result<f64> {
    check_dim(z.dim(), u.dim())?;
    Ok(z
        .iter()
        .zip(u.iter())
        .map(|(zk, uk)| {
            let w = disk_weight(*zk);
            uk.norm_sqr() / (w * w)
        })
        .sum())
}

/// Euclidean distance from `z` to the boundary of the polydisk, `min_k (1 - |z_k|)`.
pub fn boundary_distance(z: &[Complex64]) -> f64 {
    z.iter().map(|c| 1.0 - c.norm()).fold(f64::INFINITY, f64::min).max(0.0)
}

/// The mixed point `[z,w]_j = (z_1, .., z_{n-j}, w_{n-j+1}, .., w_n)`.
pub fn segment_point(z: &PolydiskPoint, w: &PolydiskPoint, j: usize) -> Result<PolydiskPoint> {
    check_dim(z.dim(), w.dim())?;
    let n = z.dim();
    if j > n {
        return Err(BlochError::IndexOutOfRange { index: j, dim: n });
    }
    let coords = z[..n - j].iter().chain(&w[n - j..]).copied().collect();
    Ok(PolydiskPoint { coords })
}

/// Replaces coordinate `j` (0-based) of `z` by `a`. The result lives in the
/// closed polydisk; `|a| = 1` is allowed.
pub fn replace_coord(z: &[Complex64], j: usize, a: Complex64) -> Result<ClosedPoint> {
    if j >= z.len() {
        return Err(BlochError::IndexOutOfRange { index: j, dim: z.len() });
    }
    let mut coords = z.to_vec();
    coords[j] = a;
    ClosedPoint::new(coords)
}

fn fmt_coords(coords: &[Complex64], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "(")?;
    for (i, c) in coords.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{:.6}{:+.6}i", c.re, c.im)?;
    }
    write!(f, ")")
}

/// Serializes complex coordinates as `[[re, im], ...]`.
pub fn coords_to_pairs(coords: &[Complex64]) -> Vec<[f64; 2]> {
    coords.iter().map(|c| [c.re, c.im]).collect()
}

pub fn pairs_to_coords(pairs: &[[f64; 2]]) -> Vec<Complex64> {
    pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

impl Serialize for PolydiskPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        coords_to_pairs(&self.coords).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolydiskPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        PolydiskPoint::new(pairs_to_coords(&pairs)).map_err(serde::de::Error::custom)
    }
}

impl Serialize for ClosedPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        coords_to_pairs(&self.coords).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClosedPoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        ClosedPoint::new(pairs_to_coords(&pairs)).map_err(serde::de::Error::custom)
    }
}

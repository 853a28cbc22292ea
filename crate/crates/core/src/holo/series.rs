//! Finite multivariate power series (polynomials) in `n` complex variables.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{BlochError, Result};
use crate::polydisk::MultiIndex;

use super::Jet;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A polynomial `Σ_γ a_γ z^γ` with finitely many nonzero coefficients.
///
/// Zero coefficients are never stored, so `terms().len()` is the number of
/// nonzero monomials.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

impl Series {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut s = Self::zero(dim);
        s.add_term(MultiIndex::zero(dim), c);
        s
    }

    /// The coordinate function `z_k` (0-based `k`).
    pub fn coordinate(dim: usize, k: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, k), ONE)
    }

    pub fn monomial(index: MultiIndex, coeff: Complex64) -> Self {
        let mut s = Self::zero(index.dim());
        s.add_term(index, coeff);
        s
    }

    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut s = Self::zero(dim);
        for (index, coeff) in terms {
            if index.dim() != dim {
                return Err(BlochError::DimensionMismatch { expected: dim, got: index.dim() });
            }
            s.add_term(index, coeff);
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Complex64> {
        &self.terms
    }

    pub fn coefficient(&self, index: &MultiIndex) -> Complex64 {
        self.terms.get(index).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree among the nonzero terms (0 for the zero series).
    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// `Σ_γ |a_γ|`, an upper bound for `sup |f|` on the closed polydisk.
    pub fn coefficient_l1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn add_term(&mut self, index: MultiIndex, coeff: Complex64) {
        if coeff == ZERO {
            return;
        }
        match self.terms.entry(index) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let v = *e.get() + coeff;
                if v == ZERO {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), *v);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Series {
        let mut out = Series::zero(self.dim);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    /// Product, dropping every term of degree above `max_degree` when given.
    pub fn mul_truncated(&self, other: &Series, max_degree: Option<usize>) -> Series {
        let mut out = Series::zero(self.dim);
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let k = ka.add(kb);
                if max_degree.is_some_and(|m| k.degree() > m) {
                    continue;
                }
                out.add_term(k, va * vb);
            }
        }
        out
    }

    pub fn mul(&self, other: &Series) -> Series {
        self.mul_truncated(other, None)
    }

    pub fn powu_truncated(&self, e: u32, max_degree: Option<usize>) -> Series {
        let mut acc = Series::constant(self.dim, ONE);
        for _ in 0..e {
            acc = acc.mul_truncated(self, max_degree);
        }
        acc
    }

    /// Keeps the terms of degree at most `m`.
    pub fn truncate(&self, m: usize) -> Series {
        Series {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.degree() <= m)
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    /// Exact partial derivative in variable `k` (0-based).
    pub fn partial(&self, k: usize) -> Result<Series> {
        if k >= self.dim {
            return Err(BlochError::IndexOutOfRange { index: k, dim: self.dim });
        }
        let mut out = Series::zero(self.dim);
        for (idx, v) in &self.terms {
            let e = idx.0[k];
            if e == 0 {
                continue;
            }
            let mut lowered = idx.clone();
            lowered.0[k] -= 1;
            out.add_term(lowered, v * f64::from(e));
        }
        Ok(out)
    }

    fn power_table(&self, z: &[Complex64]) -> Vec<Vec<Complex64>> {
        let mut max_exp = vec![0u32; self.dim];
        for idx in self.terms.keys() {
            for (m, &e) in max_exp.iter_mut().zip(&idx.0) {
                *m = (*m).max(e);
            }
        }
        z.iter()
            .zip(&max_exp)
            .map(|(&zk, &m)| {
                let mut row = Vec::with_capacity(m as usize + 1);
                let mut p = ONE;
                row.push(p);
                for _ in 0..m {
                    p *= zk;
                    row.push(p);
                }
                row
            })
            .collect()
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(BlochError::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        Ok(())
    }

    /// Evaluates the polynomial; any point of `C^n` is accepted.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_point(z)?;
        let powers = self.power_table(z);
        Ok(self
            .terms
            .iter()
            .map(|(idx, v)| {
                idx.0.iter().enumerate().fold(*v, |acc, (k, &e)| acc * powers[k][e as usize])
            })
            .sum())
    }

    pub fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        self.check_point(z)?;
        let powers = self.power_table(z);
        let mut value = ZERO;
        let mut gradient = vec![ZERO; self.dim];
        for (idx, v) in &self.terms {
            value += idx.0.iter().enumerate().fold(*v, |acc, (k, &e)| acc * powers[k][e as usize]);
            for (d, grad) in gradient.iter_mut().enumerate() {
                let ed = idx.0[d];
                if ed == 0 {
                    continue;
                }
                let mut term = v * f64::from(ed);
                for (k, &e) in idx.0.iter().enumerate() {
                    let e = if k == d { e - 1 } else { e };
                    term *= powers[k][e as usize];
                }
                *grad += term;
            }
        }
        Ok(Jet { value, gradient })
    }

    /// Returns `Some(k)` when the series is exactly the coordinate function `z_k`.
    pub fn as_coordinate(&self) -> Option<usize> {
        if self.terms.len() != 1 {
            return None;
        }
        let (idx, v) = self.terms.iter().next()?;
        if *v != ONE || idx.degree() != 1 {
            return None;
        }
        idx.0.iter().position(|&e| e == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn eval_and_partials() {
        let z1sq = Series::monomial(MultiIndex(vec![2, 0]), ONE);
        let z = [c(0.5), c(0.3)];
        assert!((z1sq.eval(&z).unwrap() - c(0.25)).norm() < 1e-15);
        let d1 = z1sq.partial(0).unwrap();
        assert_eq!(d1, Series::monomial(MultiIndex(vec![1, 0]), c(2.0)));
        assert!(z1sq.partial(1).unwrap().is_zero());
        assert!(z1sq.partial(2).is_err());

        let prod = Series::coordinate(2, 0).mul(&Series::coordinate(2, 1));
        let jet = prod.jet(&[c(0.2), c(0.5)]).unwrap();
        assert!((jet.value - c(0.1)).norm() < 1e-15);
        assert!((jet.gradient[0] - c(0.5)).norm() < 1e-15);
        assert!((jet.gradient[1] - c(0.2)).norm() < 1e-15);
    }

    #[test]
    fn cancellation_removes_terms() {
        let a = Series::coordinate(1, 0);
        let s = a.add(&a.scale(c(-1.0)));
        assert!(s.is_zero());
        assert_eq!(s.max_degree(), 0);
    }

    #[test]
    fn truncated_products() {
        let x = Series::coordinate(1, 0).add(&Series::constant(1, ONE));
        let cube = x.powu_truncated(3, Some(2));
        assert_eq!(cube.coefficient(&MultiIndex(vec![0])), c(1.0));
        assert_eq!(cube.coefficient(&MultiIndex(vec![1])), c(3.0));
        assert_eq!(cube.coefficient(&MultiIndex(vec![2])), c(3.0));
        assert_eq!(cube.coefficient(&MultiIndex(vec![3])), c(0.0));
        assert_eq!(Series::coordinate(3, 2).as_coordinate(), Some(2));
        assert_eq!(x.as_coordinate(), None);
    }
}

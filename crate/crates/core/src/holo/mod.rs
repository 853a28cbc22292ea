//! Holomorphic functions `U^n -> C` and self-maps `U^n -> U^n`.
//!
//! Every representation evaluates its value together with all first partials
//! exactly: polynomials by the degree-shift rule, closed forms by stored
//! derivative formulas, and sums/products/compositions by the usual rules of
//! calculus applied structurally. Finite differences are never used here.

mod closed;
mod map;
mod series;
pub mod spec;

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{BlochError, Result};
use crate::polydisk::{Direction, PolydiskPoint};

pub use closed::{ClosedForm, JetEvaluator, Kernel, Moebius, KERNEL_FLOOR};
pub use map::{
    certify_self_map, compose, compose_to_series, compose_with_cap, moebius_automorphism, Certificate, HoloSelfMap, MapJet,
    DEFAULT_CERTIFY_MARGIN, DEFAULT_DEGREE_CAP,
};
pub use series::Series;
pub use spec::{ComponentSpec, FunctionSpec, LayerSpec, MapSpec, SpecDocument, TermSpec};

pub(crate) use closed::{cpow, kernel_base};

/// Value and gradient of a function at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub value: Complex64,
    pub gradient: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub enum HoloFunction {
    Series(Series),
    Closed(ClosedForm),
    Sum(Vec<HoloFunction>),
    Scaled(Complex64, Box<HoloFunction>),
    Product(Box<HoloFunction>, Box<HoloFunction>),
    /// `outer ∘ inner`.
    Compose(Box<HoloFunction>, Arc<HoloSelfMap>),
}

impl From<Series> for HoloFunction {
    fn from(s: Series) -> Self {
        HoloFunction::Series(s)
    }
}

impl From<ClosedForm> for HoloFunction {
    fn from(c: ClosedForm) -> Self {
        HoloFunction::Closed(c)
    }
}

impl HoloFunction {
    pub fn zero(dim: usize) -> Self {
        HoloFunction::Series(Series::zero(dim))
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        HoloFunction::Series(Series::constant(dim, c))
    }

    pub fn coordinate(dim: usize, k: usize) -> Self {
        HoloFunction::Series(Series::coordinate(dim, k))
    }

    pub fn custom(evaluator: Arc<dyn JetEvaluator>) -> Self {
        HoloFunction::Closed(ClosedForm::Custom(evaluator))
    }

    pub fn dim(&self) -> usize {
        match self {
            HoloFunction::Series(s) => s.dim(),
            HoloFunction::Closed(c) => c.dim(),
            HoloFunction::Sum(parts) => parts.first().map_or(0, HoloFunction::dim),
            HoloFunction::Scaled(_, f) => f.dim(),
            HoloFunction::Product(a, _) => a.dim(),
            HoloFunction::Compose(_, inner) => inner.dim(),
        }
    }

    pub fn as_series(&self) -> Option<&Series> {
        match self {
            HoloFunction::Series(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero_series(&self) -> bool {
        matches!(self, HoloFunction::Series(s) if s.is_zero())
    }

    pub fn add(self, other: HoloFunction) -> HoloFunction {
        match (self, other) {
            (HoloFunction::Series(a), HoloFunction::Series(b)) => HoloFunction::Series(a.add(&b)),
            (a, b) if b.is_zero_series() => a,
            (a, b) if a.is_zero_series() => b,
            (HoloFunction::Sum(mut parts), b) => {
                parts.push(b);
                HoloFunction::Sum(parts)
            }
            (a, b) => HoloFunction::Sum(vec![a, b]),
        }
    }

    pub fn sub(self, other: HoloFunction) -> HoloFunction {
        self.add(other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(self, c: Complex64) -> HoloFunction {
        match self {
            HoloFunction::Series(s) => HoloFunction::Series(s.scale(c)),
            HoloFunction::Scaled(d, f) => HoloFunction::Scaled(c * d, f),
            f => HoloFunction::Scaled(c, Box::new(f)),
        }
    }

    pub fn mul(self, other: HoloFunction) -> HoloFunction {
        match (self, other) {
            (HoloFunction::Series(a), HoloFunction::Series(b)) => HoloFunction::Series(a.mul(&b)),
            (a, b) if a.is_zero_series() || b.is_zero_series() => HoloFunction::zero(a.dim()),
            (a, b) => HoloFunction::Product(Box::new(a), Box::new(b)),
        }
    }

    fn check_point(&self, z: &[Complex64]) -> Result<()> {
        let dim = self.dim();
        if z.len() != dim {
            return Err(BlochError::DimensionMismatch { expected: dim, got: z.len() });
        }
        Ok(())
    }

    /// Value at `z`. Polynomials accept any point; closed forms reject points
    /// where their kernels degenerate.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        self.check_point(z)?;
        match self {
            HoloFunction::Series(s) => s.eval(z),
            HoloFunction::Closed(c) => c.eval(z),
            HoloFunction::Sum(parts) => parts.iter().map(|f| f.eval(z)).sum(),
            HoloFunction::Scaled(c, f) => Ok(c * f.eval(z)?),
            HoloFunction::Product(a, b) => Ok(a.eval(z)? * b.eval(z)?),
            HoloFunction::Compose(outer, inner) => outer.eval(&inner.eval(z)?),
        }
    }

    /// Value and all first partials at `z`.
    pub fn jet(&self, z: &[Complex64]) -> Result<Jet> {
        self.check_point(z)?;
        match self {
            HoloFunction::Series(s) => s.jet(z),
            HoloFunction::Closed(c) => c.jet(z),
            HoloFunction::Sum(parts) => {
                let mut acc = Jet { value: Complex64::new(0.0, 0.0), gradient: vec![Complex64::new(0.0, 0.0); z.len()] };
                for f in parts {
                    let j = f.jet(z)?;
                    acc.value += j.value;
                    for (g, d) in acc.gradient.iter_mut().zip(j.gradient) {
                        *g += d;
                    }
                }
                Ok(acc)
            }
            HoloFunction::Scaled(c, f) => {
                let j = f.jet(z)?;
                Ok(Jet { value: c * j.value, gradient: j.gradient.into_iter().map(|d| c * d).collect() })
            }
            HoloFunction::Product(a, b) => {
                let ja = a.jet(z)?;
                let jb = b.jet(z)?;
                let gradient =
                    ja.gradient.iter().zip(&jb.gradient).map(|(da, db)| da * jb.value + ja.value * db).collect();
                Ok(Jet { value: ja.value * jb.value, gradient })
            }
            HoloFunction::Compose(outer, inner) => {
                let mj = inner.jet(z)?;
                let jo = outer.jet(&mj.values)?;
                let n = z.len();
                let gradient = (0..n)
                    .map(|k| jo.gradient.iter().zip(&mj.jacobian).map(|(dfm, row)| dfm * row[k]).sum())
                    .collect();
                Ok(Jet { value: jo.value, gradient })
            }
        }
    }

    /// All first partials at `z`, skipping value computations that the
    /// partials do not need.
    pub fn gradient_at(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_point(z)?;
        match self {
            HoloFunction::Closed(ClosedForm::Test(t)) => t.gradient(z),
            HoloFunction::Sum(parts) => {
                let mut acc = vec![Complex64::new(0.0, 0.0); z.len()];
                for f in parts {
                    for (g, d) in acc.iter_mut().zip(f.gradient_at(z)?) {
                        *g += d;
                    }
                }
                Ok(acc)
            }
            HoloFunction::Scaled(c, f) => Ok(f.gradient_at(z)?.into_iter().map(|d| c * d).collect()),
            HoloFunction::Compose(outer, inner) => {
                let mj = inner.jet(z)?;
                let go = outer.gradient_at(&mj.values)?;
                Ok((0..z.len()).map(|k| go.iter().zip(&mj.jacobian).map(|(dfm, row)| dfm * row[k]).sum()).collect())
            }
            _ => Ok(self.jet(z)?.gradient),
        }
    }

    /// The gradient `∇f(z)` as a direction vector.
    pub fn gradient(&self, z: &PolydiskPoint) -> Result<Direction> {
        Ok(Direction::new(self.jet(z)?.gradient))
    }

    /// Exact partial derivative `∂f/∂z_k` (0-based `k`) as a new function.
    pub fn partial(&self, k: usize) -> Result<HoloFunction> {
        let dim = self.dim();
        if k >= dim {
            return Err(BlochError::IndexOutOfRange { index: k, dim });
        }
        match self {
            HoloFunction::Series(s) => Ok(HoloFunction::Series(s.partial(k)?)),
            HoloFunction::Closed(c) => c.partial(k),
            HoloFunction::Sum(parts) => {
                let mut acc = HoloFunction::zero(dim);
                for f in parts {
                    acc = acc.add(f.partial(k)?);
                }
                Ok(acc)
            }
            HoloFunction::Scaled(c, f) => Ok(f.partial(k)?.scale(*c)),
            HoloFunction::Product(a, b) => {
                let left = a.partial(k)?.mul((**b).clone());
                let right = (**a).clone().mul(b.partial(k)?);
                Ok(left.add(right))
            }
            HoloFunction::Compose(outer, inner) => {
                let mut acc = HoloFunction::zero(dim);
                for (m, component) in inner.components().iter().enumerate() {
                    let d_outer = outer.partial(m)?;
                    let d_inner = component.partial(k)?;
                    if d_outer.is_zero_series() || d_inner.is_zero_series() {
                        continue;
                    }
                    let composed = match &d_outer {
                        HoloFunction::Series(s) if s.max_degree() == 0 => d_outer.clone().into_dim(dim)?,
                        _ => HoloFunction::Compose(Box::new(d_outer), Arc::clone(inner)),
                    };
                    acc = acc.add(composed.mul(d_inner));
                }
                Ok(acc)
            }
        }
    }

    /// Re-expresses a constant series in another dimension (used when a
    /// composition collapses to a constant).
    fn into_dim(self, dim: usize) -> Result<HoloFunction> {
        match self {
            HoloFunction::Series(s) if s.max_degree() == 0 => {
                let c = s.terms().values().next().copied().unwrap_or_default();
                Ok(HoloFunction::constant(dim, c))
            }
            f if f.dim() == dim => Ok(f),
            f => Err(BlochError::DimensionMismatch { expected: dim, got: f.dim() }),
        }
    }

    /// The Taylor polynomial of degree `m` at the origin.
    pub fn taylor_truncate(&self, m: usize) -> Result<Series> {
        match self {
            HoloFunction::Series(s) => Ok(s.truncate(m)),
            HoloFunction::Closed(c) => Ok(c.truncate(m)?.truncate(m)),
            HoloFunction::Sum(parts) => {
                let mut acc = Series::zero(self.dim());
                for f in parts {
                    acc = acc.add(&f.taylor_truncate(m)?);
                }
                Ok(acc)
            }
            HoloFunction::Scaled(c, f) => Ok(f.taylor_truncate(m)?.scale(*c)),
            HoloFunction::Product(a, b) => Ok(a.taylor_truncate(m)?.mul_truncated(&b.taylor_truncate(m)?, Some(m))),
            HoloFunction::Compose(outer, inner) => {
                let n = inner.dim();
                let comps: Vec<Series> =
                    inner.components().iter().map(|c| c.taylor_truncate(m)).collect::<Result<_>>()?;
                let outer_poly = match outer.as_ref() {
                    HoloFunction::Series(s) => s.clone(),
                    other => {
                        // Substituting a truncated outer series is exact only
                        // when every inner component vanishes at the origin.
                        let origin = PolydiskPoint::origin(n);
                        if inner.eval(&origin)?.iter().any(|v| v.norm() > 0.0) {
                            return Err(BlochError::TruncationUnavailable(
                                "composition with a non-polynomial outer function and φ(0) ≠ 0".into(),
                            ));
                        }
                        other.taylor_truncate(m)?
                    }
                };
                let mut acc = Series::zero(n);
                for (idx, coeff) in outer_poly.terms() {
                    let mut term = Series::constant(n, *coeff);
                    for (comp, &e) in comps.iter().zip(idx.exponents()) {
                        if e > 0 {
                            term = term.mul_truncated(&comp.powu_truncated(e, Some(m)), Some(m));
                        }
                    }
                    acc = acc.add(&term);
                }
                Ok(acc)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            HoloFunction::Series(s) => format!("polynomial(degree {}, {} terms)", s.max_degree(), s.terms().len()),
            HoloFunction::Closed(c) => c.describe(),
            HoloFunction::Sum(parts) => {
                format!("sum[{}]", parts.iter().map(HoloFunction::describe).collect::<Vec<_>>().join(", "))
            }
            HoloFunction::Scaled(c, f) => format!("{c}·{}", f.describe()),
            HoloFunction::Product(a, b) => format!("({})·({})", a.describe(), b.describe()),
            HoloFunction::Compose(o, _) => format!("{} ∘ φ", o.describe()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polydisk::MultiIndex;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fd_partial(f: &HoloFunction, z: &[Complex64], k: usize, h: f64) -> Complex64 {
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[k] += h;
        zm[k] -= h;
        (f.eval(&zp).unwrap() - f.eval(&zm).unwrap()) / (2.0 * h)
    }

    #[test]
    fn eval_examples() {
        let z1sq = HoloFunction::Series(Series::monomial(MultiIndex(vec![2, 0]), c(1.0, 0.0)));
        assert!((z1sq.eval(&[c(0.5, 0.0), c(0.3, 0.0)]).unwrap() - c(0.25, 0.0)).norm() < 1e-15);
        let seven = HoloFunction::constant(2, c(7.0, 0.0));
        assert_eq!(seven.eval(&[c(0.1, 0.2), c(-0.4, 0.0)]).unwrap(), c(7.0, 0.0));
        let z1z2 = HoloFunction::coordinate(2, 0).mul(HoloFunction::coordinate(2, 1));
        assert!((z1z2.eval(&[c(0.2, 0.0), c(0.5, 0.0)]).unwrap() - c(0.1, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let z = PolydiskPoint::from_reals(&[0.2, 0.5]).unwrap();
        let sum = HoloFunction::coordinate(2, 0).add(HoloFunction::coordinate(2, 1));
        assert_eq!(sum.gradient(&z).unwrap().components, vec![c(1.0, 0.0); 2]);
        let prod = HoloFunction::coordinate(2, 0).mul(HoloFunction::coordinate(2, 1));
        let g = prod.gradient(&z).unwrap();
        assert!((g[0] - c(0.5, 0.0)).norm() < 1e-15 && (g[1] - c(0.2, 0.0)).norm() < 1e-15);
        assert!(HoloFunction::constant(2, c(3.0, 1.0)).gradient(&z).unwrap().is_zero());
    }

    #[test]
    fn product_partial_matches_jet_and_fd() {
        let m = Moebius::new(2, 1, c(0.3, -0.2), 0.4).unwrap();
        let f = HoloFunction::Closed(ClosedForm::Moebius(m)).mul(HoloFunction::coordinate(2, 0));
        let z = [c(0.3, 0.1), c(-0.2, 0.5)];
        let jet = f.jet(&z).unwrap();
        for k in 0..2 {
            let structural = f.partial(k).unwrap().eval(&z).unwrap();
            assert!((structural - jet.gradient[k]).norm() < 1e-14);
            assert!((fd_partial(&f, &z, k, 1e-5) - jet.gradient[k]).norm() < 1e-8);
        }
        assert!(f.partial(2).is_err());
    }

    #[test]
    fn custom_evaluator_has_no_partials() {
        #[derive(Debug)]
        struct Doubler;
        impl JetEvaluator for Doubler {
            fn dim(&self) -> usize {
                1
            }
            fn jet(&self, z: &[Complex64]) -> Result<Jet> {
                Ok(Jet { value: 2.0 * z[0], gradient: vec![c(2.0, 0.0)] })
            }
        }
        let f = HoloFunction::custom(Arc::new(Doubler));
        assert_eq!(f.eval(&[c(0.25, 0.0)]).unwrap(), c(0.5, 0.0));
        assert!(matches!(f.partial(0), Err(BlochError::DerivativeUnavailable(_))));
        assert!(matches!(f.taylor_truncate(3), Err(BlochError::TruncationUnavailable(_))));
    }
}

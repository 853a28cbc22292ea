//! Holomorphic self-maps of the polydisk and composition.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::polydisk::{coords_to_pairs, PolydiskPoint};
use crate::sampling::{maximize, SamplingPlan};

use super::{ClosedForm, HoloFunction, Moebius, Series};

/// Largest degree a polynomial composition is expanded to before staying lazy.
pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Required gap below 1 for sampled self-map certificates.
pub const DEFAULT_CERTIFY_MARGIN: f64 = 1e-6;

/// Evidence that a map sends the polydisk into itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Every component is a polynomial with `Σ|a_γ| <= 1`.
    Coefficients,
    /// Every component is a disk automorphism of a distinct coordinate.
    Automorphism,
    /// Sampled `sup_z max_l |φ_l(z)| <= 1 - margin`.
    Sampling { margin: f64, max_modulus: f64 },
    Unverified { max_modulus: Option<f64>, witness: Option<Vec<[f64; 2]>> },
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        !matches!(self, Certificate::Unverified { .. })
    }
}

/// Values and Jacobian (`jacobian[l][k] = ∂φ_l/∂z_k`) of a map at one point.
#[derive(Clone, Debug)]
pub struct MapJet {
    pub values: Vec<Complex64>,
    pub jacobian: Vec<Vec<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct HoloSelfMap {
    components: Vec<HoloFunction>,
    certificate: Certificate,
}

impl HoloSelfMap {
    /// Builds an uncertified map; every component must live on `C^n` with
    /// `n` equal to the number of components.
    pub fn new(components: Vec<HoloFunction>) -> Result<Self> {
        let n = components.len();
        if n == 0 {
            return Err(BlochError::InvalidParameter("a self-map needs at least one component".into()));
        }
        for f in &components {
            if f.dim() != n {
                return Err(BlochError::DimensionMismatch { expected: n, got: f.dim() });
            }
        }
        let mut map = Self { components, certificate: Certificate::Unverified { max_modulus: None, witness: None } };
        map.certificate = exact_certificate(&map).unwrap_or(map.certificate);
        Ok(map)
    }

    pub fn identity(n: usize) -> Self {
        let components = (0..n).map(|k| HoloFunction::coordinate(n, k)).collect();
        Self { components, certificate: Certificate::Coefficients }
    }

    /// The constant map `z ↦ c`.
    pub fn constant(c: &[Complex64]) -> Result<Self> {
        let n = c.len();
        Self::new(c.iter().map(|&v| HoloFunction::constant(n, v)).collect())
    }

    /// Builds from polynomial components.
    pub fn from_series(components: Vec<Series>) -> Result<Self> {
        Self::new(components.into_iter().map(HoloFunction::Series).collect())
    }

    /// Runs [`certify_self_map`] and stores the resulting certificate.
    pub fn certified(mut self, plan: &SamplingPlan) -> Result<Self> {
        self.certificate = certify_self_map(&self, plan)?;
        Ok(self)
    }

    /// Overrides the certificate. Intended for maps whose self-map property
    /// is known from outside the toolkit.
    pub fn with_certificate(mut self, certificate: Certificate) -> Self {
        self.certificate = certificate;
        self
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[HoloFunction] {
        &self.components
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_certified()
    }

    pub fn is_identity(&self) -> bool {
        self.components
            .iter()
            .enumerate()
            .all(|(l, f)| f.as_series().and_then(Series::as_coordinate) == Some(l))
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        self.components.iter().map(|f| f.eval(z)).collect()
    }

    pub fn jet(&self, z: &[Complex64]) -> Result<MapJet> {
        let mut values = Vec::with_capacity(self.dim());
        let mut jacobian = Vec::with_capacity(self.dim());
        for f in &self.components {
            let j = f.jet(z)?;
            values.push(j.value);
            jacobian.push(j.gradient);
        }
        Ok(MapJet { values, jacobian })
    }

    /// The complex Jacobian matrix, entry `(l, k) = ∂φ_l/∂z_k(z)`.
    pub fn jacobian(&self, z: &PolydiskPoint) -> Result<DMatrix<Complex64>> {
        let n = self.dim();
        let jet = self.jet(z)?;
        Ok(DMatrix::from_fn(n, n, |l, k| jet.jacobian[l][k]))
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Arc<HoloSelfMap>) -> Result<HoloSelfMap> {
        self.after_with_cap(inner, DEFAULT_DEGREE_CAP)
    }

    /// `self ∘ inner`, expanding polynomial compositions up to degree `cap`.
    pub fn after_with_cap(&self, inner: &Arc<HoloSelfMap>, cap: usize) -> Result<HoloSelfMap> {
        let components =
            self.components.iter().map(|f| compose_with_cap(f, inner, cap)).collect::<Result<Vec<_>>>()?;
        HoloSelfMap::new(components)
    }
}

/// Composes `f` with `phi`. Polynomial compositions whose degree stays within
/// [`DEFAULT_DEGREE_CAP`] are expanded into a series; everything else stays a
/// lazy composition node.
pub fn compose(f: &HoloFunction, phi: &Arc<HoloSelfMap>) -> Result<HoloFunction> {
    compose_with_cap(f, phi, DEFAULT_DEGREE_CAP)
}

/// [`compose`] with an explicit degree cap for series expansion.
pub fn compose_with_cap(f: &HoloFunction, phi: &Arc<HoloSelfMap>, cap: usize) -> Result<HoloFunction> {
    if f.dim() != phi.dim() {
        return Err(BlochError::DimensionMismatch { expected: phi.dim(), got: f.dim() });
    }
    if phi.is_identity() {
        return Ok(f.clone());
    }
    if let HoloFunction::Series(s) = f {
        if s.max_degree() == 0 {
            return Ok(f.clone());
        }
        match compose_to_series(s, phi, cap) {
            Ok(expanded) => return Ok(HoloFunction::Series(expanded)),
            Err(BlochError::DegreeCapExceeded { .. }) | Err(BlochError::TruncationUnavailable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(HoloFunction::Compose(Box::new(f.clone()), Arc::clone(phi)))
}

/// Expands `f ∘ φ` for polynomial `f` and polynomial `φ`.
pub fn compose_to_series(f: &Series, phi: &HoloSelfMap, cap: usize) -> Result<Series> {
    let comps: Vec<&Series> = phi
        .components()
        .iter()
        .map(|c| c.as_series().ok_or_else(|| BlochError::TruncationUnavailable(c.describe())))
        .collect::<Result<_>>()?;
    let inner_degree = comps.iter().map(|s| s.max_degree()).max().unwrap_or(0);
    let degree = f.max_degree() * inner_degree;
    if degree > cap {
        return Err(BlochError::DegreeCapExceeded { degree, cap });
    }
    let n = phi.dim();
    let mut acc = Series::zero(n);
    for (idx, coeff) in f.terms() {
        let mut term = Series::constant(n, *coeff);
        for (comp, &e) in comps.iter().zip(idx.exponents()) {
            if e > 0 {
                term = term.mul(&comp.powu_truncated(e, None));
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// The polydisk automorphism whose component `k` is
/// `e^{iθ_k} (z_{σ(k)} - a_k) / (1 - conj(a_k) z_{σ(k)})`.
pub fn moebius_automorphism(a: &[Complex64], theta: &[f64], sigma: &[usize]) -> Result<HoloSelfMap> {
    let n = a.len();
    if theta.len() != n || sigma.len() != n {
        return Err(BlochError::DimensionMismatch { expected: n, got: theta.len().max(sigma.len()) });
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return Err(BlochError::InvalidParameter(format!("{sigma:?} is not a permutation")));
        }
        seen[s] = true;
    }
    let components = (0..n)
        .map(|k| Ok(HoloFunction::Closed(ClosedForm::Moebius(Moebius::new(n, sigma[k], a[k], theta[k])?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(HoloSelfMap { components, certificate: Certificate::Automorphism })
}

fn is_automorphism(phi: &HoloSelfMap) -> bool {
    let mut seen = vec![false; phi.dim()];
    phi.components().iter().all(|f| match f {
        HoloFunction::Closed(ClosedForm::Moebius(m)) => !std::mem::replace(&mut seen[m.source], true),
        _ => false,
    })
}

/// The coefficient and automorphism tests, which need no sampling.
fn exact_certificate(phi: &HoloSelfMap) -> Option<Certificate> {
    let by_coefficients = phi
        .components()
        .iter()
        .all(|f| f.as_series().is_some_and(|s| s.coefficient_l1() <= 1.0 + crate::polydisk::EPS_MACH));
    if by_coefficients {
        Some(Certificate::Coefficients)
    } else if is_automorphism(phi) {
        Some(Certificate::Automorphism)
    } else {
        None
    }
}

/// Certifies the self-map property: coefficient test first, then the
/// automorphism shape, then sampling of `max_l |φ_l|` over `plan`.
pub fn certify_self_map(phi: &HoloSelfMap, plan: &SamplingPlan) -> Result<Certificate> {
    if let Some(cert) = exact_certificate(phi) {
        return Ok(cert);
    }
    let margin = DEFAULT_CERTIFY_MARGIN;
    let search = maximize(phi.dim(), plan, |z| {
        Ok(phi.eval(z)?.iter().map(|v| v.norm()).fold(0.0, f64::max))
    })?;
    if search.singular_count == 0 && search.value <= 1.0 - margin {
        Ok(Certificate::Sampling { margin, max_modulus: search.value })
    } else {
        Ok(Certificate::Unverified { max_modulus: Some(search.value), witness: Some(coords_to_pairs(&search.witness)) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polydisk::MultiIndex;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn quick_plan() -> SamplingPlan {
        SamplingPlan { levels: 8, angular_count: 16, max_rounds: 3, ..SamplingPlan::default() }
    }

    #[test]
    fn jacobian_examples() {
        let z = PolydiskPoint::from_reals(&[0.2, 0.5]).unwrap();
        let id = HoloSelfMap::identity(2);
        assert_eq!(id.jacobian(&z).unwrap(), DMatrix::identity(2, 2));

        let swap = HoloSelfMap::new(vec![HoloFunction::coordinate(2, 1), HoloFunction::coordinate(2, 0)]).unwrap();
        let j = swap.jacobian(&z).unwrap();
        assert_eq!(j[(0, 1)], c(1.0, 0.0));
        assert_eq!(j[(0, 0)], c(0.0, 0.0));

        let phi = HoloSelfMap::new(vec![
            HoloFunction::coordinate(2, 0).mul(HoloFunction::coordinate(2, 1)),
            HoloFunction::coordinate(2, 1),
        ])
        .unwrap();
        let j = phi.jacobian(&z).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.2, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((j - expected).norm() < 1e-15);
    }

    #[test]
    fn compose_examples() {
        let phi = Arc::new(
            HoloSelfMap::new(vec![
                HoloFunction::coordinate(2, 0).mul(HoloFunction::coordinate(2, 1)),
                HoloFunction::coordinate(2, 1),
            ])
            .unwrap(),
        );
        let z1sq = HoloFunction::Series(Series::monomial(MultiIndex(vec![2, 0]), c(1.0, 0.0)));
        let composed = compose(&z1sq, &phi).unwrap();
        let expected = Series::monomial(MultiIndex(vec![2, 2]), c(1.0, 0.0));
        assert_eq!(composed.as_series(), Some(&expected));

        let id = Arc::new(HoloSelfMap::identity(2));
        let m = HoloFunction::Closed(ClosedForm::Moebius(Moebius::new(2, 0, c(0.2, 0.1), 0.0).unwrap()));
        let same = compose(&m, &id).unwrap();
        let z = [c(0.3, 0.3), c(0.1, -0.6)];
        assert_eq!(same.eval(&z).unwrap(), m.eval(&z).unwrap());

        let constant = Arc::new(HoloSelfMap::constant(&[c(0.25, 0.5), c(-0.1, 0.0)]).unwrap());
        let f = compose(&HoloFunction::coordinate(2, 0), &constant).unwrap();
        assert_eq!(f.eval(&z).unwrap(), c(0.25, 0.5));
        assert!(f.gradient(&PolydiskPoint::origin(2)).unwrap().is_zero());
    }

    #[test]
    fn degree_cap_is_enforced() {
        let big = Series::monomial(MultiIndex(vec![10]), c(1.0, 0.0));
        let phi = HoloSelfMap::from_series(vec![Series::monomial(MultiIndex(vec![7]), c(1.0, 0.0))]).unwrap();
        assert!(matches!(compose_to_series(&big, &phi, 64), Err(BlochError::DegreeCapExceeded { degree: 70, .. })));
        let lazy = compose(&HoloFunction::Series(big), &Arc::new(phi)).unwrap();
        assert!(matches!(lazy, HoloFunction::Compose(..)));
        assert!((lazy.eval(&[c(0.9, 0.0)]).unwrap() - c(0.9f64.powi(70), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn certification_examples() {
        let plan = quick_plan();
        let half = Series::coordinate(2, 0).scale(c(0.5, 0.0)).add(&Series::coordinate(2, 1).scale(c(0.5, 0.0)));
        let phi = HoloSelfMap::from_series(vec![half, Series::coordinate(2, 1)]).unwrap();
        assert_eq!(certify_self_map(&phi, &plan).unwrap(), Certificate::Coefficients);
        assert_eq!(certify_self_map(&HoloSelfMap::identity(3), &plan).unwrap(), Certificate::Coefficients);

        let doubled = HoloSelfMap::from_series(vec![Series::coordinate(2, 0).scale(c(2.0, 0.0)), Series::coordinate(2, 1)])
            .unwrap();
        match certify_self_map(&doubled, &plan).unwrap() {
            Certificate::Unverified { max_modulus: Some(m), .. } => assert!(m > 1.0),
            other => panic!("expected Unverified, got {other:?}"),
        }

        let auto = moebius_automorphism(&[c(0.3, 0.0), c(0.0, 0.5)], &[0.1, 0.2], &[1, 0]).unwrap();
        assert_eq!(certify_self_map(&auto, &plan).unwrap(), Certificate::Automorphism);

        // A product of automorphisms is not recognized structurally but samples below 1.
        let prod = HoloSelfMap::new(vec![auto.components()[0].clone().mul(auto.components()[1].clone())]);
        assert!(prod.is_err());
        let inner = HoloFunction::Closed(ClosedForm::Moebius(Moebius::new(1, 0, c(0.5, 0.0), 0.0).unwrap()));
        let shrunk = HoloSelfMap::new(vec![inner.scale(c(0.9, 0.0))]).unwrap();
        assert!(matches!(certify_self_map(&shrunk, &plan).unwrap(), Certificate::Sampling { .. }));
    }

    #[test]
    fn moebius_automorphism_examples() {
        let id = moebius_automorphism(&[c(0.0, 0.0)], &[0.0], &[0]).unwrap();
        let z = [c(0.3, -0.2)];
        assert!((id.eval(&z).unwrap()[0] - z[0]).norm() < 1e-15);
        let m = moebius_automorphism(&[c(0.5, 0.0)], &[0.0], &[0]).unwrap();
        assert!(m.eval(&[c(0.5, 0.0)]).unwrap()[0].norm() < 1e-15);
        let d = m.jacobian(&PolydiskPoint::origin(1)).unwrap();
        assert!((d[(0, 0)] - c(0.75, 0.0)).norm() < 1e-15);
        assert!(moebius_automorphism(&[c(1.0, 0.0)], &[0.0], &[0]).is_err());
        assert!(moebius_automorphism(&[c(0.1, 0.0); 2], &[0.0; 2], &[0, 0]).is_err());
    }
}

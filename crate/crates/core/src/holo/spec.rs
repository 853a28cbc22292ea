//! JSON map and function specifications.
//!
//! ```json
//! {"dimension": 2,
//!  "components": [
//!    {"type": "series", "terms": [{"exponents": [1, 1], "coeff": [1, 0]}]},
//!    {"type": "moebius", "a": [0.5, 0], "theta": 0, "source": 2}],
//!  "compose": [{"components": [...]}]}
//! ```
//!
//! Coordinate indices (`source`, `l`) are 1-based in JSON. A `compose` list
//! `[M1, M2, ...]` yields the map `M0 ∘ M1 ∘ M2 ∘ ...` where `M0` is the
//! top-level component list. A function file uses `"function"` in place of
//! `"components"`.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::polydisk::MultiIndex;
use crate::testfn::{Family, TestFunction};

use super::{ClosedForm, HoloFunction, HoloSelfMap, Moebius, Series, DEFAULT_DEGREE_CAP};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub exponents: Vec<u32>,
    pub coeff: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ComponentSpec {
    Series {
        terms: Vec<TermSpec>,
    },
    Moebius {
        a: [f64; 2],
        #[serde(default)]
        theta: f64,
        source: usize,
    },
    Test {
        family: Family,
        l: usize,
        w: [f64; 2],
        p: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub components: Vec<ComponentSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub dimension: usize,
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compose: Vec<LayerSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub dimension: usize,
    pub function: ComponentSpec,
}

/// Either kind of specification file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecDocument {
    Function(FunctionSpec),
    Map(MapSpec),
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn cplx(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn one_based(index: usize, dim: usize, what: &str) -> Result<usize> {
    if index == 0 || index > dim {
        return Err(BlochError::Spec(format!("{what} = {index} must lie in 1..={dim}")));
    }
    Ok(index - 1)
}

impl ComponentSpec {
    pub fn build(&self, dim: usize) -> Result<HoloFunction> {
        match self {
            ComponentSpec::Series { terms } => {
                let mut series = Series::zero(dim);
                for t in terms {
                    if t.exponents.len() != dim {
                        return Err(BlochError::Spec(format!(
                            "exponent list {:?} has length {}, expected {dim}",
                            t.exponents,
                            t.exponents.len()
                        )));
                    }
                    series.add_term(MultiIndex(t.exponents.clone()), cplx(t.coeff));
                }
                Ok(HoloFunction::Series(series))
            }
            ComponentSpec::Moebius { a, theta, source } => {
                let source = one_based(*source, dim, "source")?;
                Ok(HoloFunction::Closed(ClosedForm::Moebius(Moebius::new(dim, source, cplx(*a), *theta)?)))
            }
            ComponentSpec::Test { family, l, w, p } => {
                let l = one_based(*l, dim, "l")?;
                Ok(TestFunction::new(*family, dim, l, cplx(*w), *p)?.to_holo())
            }
        }
    }

    pub fn from_series(series: &Series) -> Self {
        let terms = series
            .terms()
            .iter()
            .map(|(idx, c)| TermSpec { exponents: idx.exponents().to_vec(), coeff: pair(*c) })
            .collect();
        ComponentSpec::Series { terms }
    }

    pub fn from_test(t: &TestFunction) -> Self {
        ComponentSpec::Test { family: t.family(), l: t.l() + 1, w: pair(t.w()), p: t.p() }
    }

    /// Spec for a function, when its representation has one.
    pub fn from_function(f: &HoloFunction) -> Option<Self> {
        match f {
            HoloFunction::Series(s) => Some(Self::from_series(s)),
            HoloFunction::Closed(ClosedForm::Test(t)) => Some(Self::from_test(t)),
            HoloFunction::Closed(ClosedForm::Moebius(m)) => {
                Some(ComponentSpec::Moebius { a: pair(m.a), theta: m.theta, source: m.source + 1 })
            }
            _ => None,
        }
    }
}

fn build_layer(components: &[ComponentSpec], dim: usize) -> Result<HoloSelfMap> {
    if components.len() != dim {
        return Err(BlochError::Spec(format!("{} components given for dimension {dim}", components.len())));
    }
    let comps = components.iter().map(|c| c.build(dim)).collect::<Result<Vec<_>>>()?;
    HoloSelfMap::new(comps)
}

impl MapSpec {
    pub fn build(&self) -> Result<HoloSelfMap> {
        self.build_with_cap(DEFAULT_DEGREE_CAP)
    }

    /// Builds the (uncertified) map; polynomial layers are expanded up to
    /// total degree `cap`.
    pub fn build_with_cap(&self, cap: usize) -> Result<HoloSelfMap> {
        let n = self.dimension;
        if n == 0 {
            return Err(BlochError::Spec("dimension must be at least 1".into()));
        }
        let mut layers = vec![build_layer(&self.components, n)?];
        for layer in &self.compose {
            if let Some(d) = layer.dimension {
                if d != n {
                    return Err(BlochError::Spec(format!("compose layer dimension {d} differs from {n}")));
                }
            }
            layers.push(build_layer(&layer.components, n)?);
        }
        let mut acc = layers.pop().expect("at least one layer");
        while let Some(outer) = layers.pop() {
            acc = outer.after_with_cap(&Arc::new(acc), cap)?;
        }
        Ok(acc)
    }

    pub fn from_map(phi: &HoloSelfMap) -> Option<Self> {
        let components = phi.components().iter().map(ComponentSpec::from_function).collect::<Option<Vec<_>>>()?;
        Some(MapSpec { dimension: phi.dim(), components, compose: Vec::new() })
    }
}

impl FunctionSpec {
    pub fn build(&self) -> Result<HoloFunction> {
        if self.dimension == 0 {
            return Err(BlochError::Spec("dimension must be at least 1".into()));
        }
        self.function.build(self.dimension)
    }
}

impl SpecDocument {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| BlochError::Spec(format!("invalid specification: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn dimension(&self) -> usize {
        match self {
            SpecDocument::Function(f) => f.dimension,
            SpecDocument::Map(m) => m.dimension,
        }
    }

    /// The functions a norm estimate runs on: the single function, or each
    /// component of the (composed) map.
    pub fn functions(&self, cap: usize) -> Result<Vec<HoloFunction>> {
        match self {
            SpecDocument::Function(f) => Ok(vec![f.build()?]),
            SpecDocument::Map(m) => Ok(m.build_with_cap(cap)?.components().to_vec()),
        }
    }

    pub fn map(&self, cap: usize) -> Result<HoloSelfMap> {
        match self {
            SpecDocument::Map(m) => m.build_with_cap(cap),
            SpecDocument::Function(_) => Err(BlochError::Spec("a self-map specification is required".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn parses_series_and_moebius() {
        let text = r#"{"dimension": 2, "components": [
            {"type": "series", "terms": [{"exponents": [1, 1], "coeff": [1, 0]}]},
            {"type": "moebius", "a": [0.5, 0], "theta": 0, "source": 2}]}"#;
        let phi = SpecDocument::parse(text).unwrap().map(DEFAULT_DEGREE_CAP).unwrap();
        let v = phi.eval(&[c(0.2, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((v[0] - c(0.1, 0.0)).norm() < 1e-15);
        assert!(v[1].norm() < 1e-15);
    }

    #[test]
    fn compose_list_applies_inner_layers_first() {
        // M0 = (z1^2), M1 = (z1 / 2 + 1/4) -> (z1/2 + 1/4)^2
        let text = r#"{"dimension": 1,
            "components": [{"type": "series", "terms": [{"exponents": [2], "coeff": [1, 0]}]}],
            "compose": [{"components": [{"type": "series", "terms": [
                {"exponents": [1], "coeff": [0.5, 0]}, {"exponents": [0], "coeff": [0.25, 0]}]}]}]}"#;
        let phi = SpecDocument::parse(text).unwrap().map(DEFAULT_DEGREE_CAP).unwrap();
        let z = c(0.3, -0.4);
        let expected = (z * 0.5 + 0.25).powi(2);
        assert!((phi.eval(&[z]).unwrap()[0] - expected).norm() < 1e-15);
    }

    #[test]
    fn function_document_and_round_trip() {
        let t = crate::testfn::make_g(2, 0, c(0.5, 0.0), 1.0).unwrap();
        let doc = SpecDocument::Function(FunctionSpec { dimension: 2, function: ComponentSpec::from_test(&t) });
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains("\"l\":1"));
        let back = SpecDocument::parse(&text).unwrap();
        assert_eq!(back, doc);
        let f = &back.functions(DEFAULT_DEGREE_CAP).unwrap()[0];
        assert!((f.eval(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap() - c(0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(SpecDocument::parse("{").is_err());
        let wrong_len = r#"{"dimension": 2, "components": [
            {"type": "series", "terms": [{"exponents": [1], "coeff": [1, 0]}]},
            {"type": "series", "terms": []}]}"#;
        assert!(SpecDocument::parse(wrong_len).unwrap().map(8).is_err());
        let zero_source = r#"{"dimension": 1, "components": [{"type": "moebius", "a": [0, 0], "source": 0}]}"#;
        assert!(SpecDocument::parse(zero_source).unwrap().map(8).is_err());
    }
}

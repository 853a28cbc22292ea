use std::path::Path;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::holo::{moebius_automorphism, HoloFunction, HoloSelfMap, Series, SpecDocument};
use crate::polydisk::MultiIndex;
use crate::sampling::stream_rng;
use crate::testfn::{Family, TestFunction};

/// Named functions and self-maps that the lemma suite and the oracle run over.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub functions: Vec<(String, HoloFunction)>,
    pub maps: Vec<(String, HoloSelfMap)>,
}

impl Corpus {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty() && self.maps.is_empty()
    }

    /// Random polynomials, test functions for exponent `p`, and a handful of
    /// self-maps, all on `U^n`.
    pub fn builtin(n: usize, p: f64, seed: u64) -> Result<Self> {
        let mut functions = random_polynomials(n, 8, 4, seed);
        functions.extend(test_functions(n, p)?);
        Ok(Self { functions, maps: builtin_maps(n)? })
    }

    /// Reads specification files: function documents add functions, map
    /// documents add maps.
    pub fn from_specs(paths: &[impl AsRef<Path>], cap: usize) -> Result<Self> {
        let mut corpus = Self::empty();
        for path in paths {
            let path = path.as_ref();
            let label = path.display().to_string();
            match SpecDocument::load(path)? {
                doc @ SpecDocument::Function(_) => {
                    for f in doc.functions(cap)? {
                        corpus.functions.push((label.clone(), f));
                    }
                }
                doc @ SpecDocument::Map(_) => corpus.maps.push((label, doc.map(cap)?)),
            }
        }
        Ok(corpus)
    }
}

/// `count` polynomials of degree at most `max_degree` with one to four
/// terms and coefficients in the unit square; each has a nonconstant term.
pub fn random_polynomials(n: usize, count: usize, max_degree: usize, seed: u64) -> Vec<(String, HoloFunction)> {
    let mut rng = stream_rng(seed, 0x9017);
    let indices: Vec<MultiIndex> = MultiIndex::all_up_to(n, max_degree);
    let nonconstant: Vec<&MultiIndex> = indices.iter().filter(|m| m.degree() > 0).collect();
    (0..count)
        .map(|i| {
            let mut s = Series::zero(n);
            let lead = (*nonconstant.choose(&mut rng).expect("max_degree >= 1")).clone();
            s.add_term(lead, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            for _ in 0..rng.gen_range(0..4) {
                let m = indices.choose(&mut rng).expect("non-empty").clone();
                s.add_term(m, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
            (format!("poly-{i}"), HoloFunction::Series(s))
        })
        .collect()
}

/// F, G and H members at `w ∈ {0.5, 0.5i, 0.8 e^{iπ/4}}` for every valid `l`.
pub fn test_functions(n: usize, p: f64) -> Result<Vec<(String, HoloFunction)>> {
    let ws = [
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::from_polar(0.8, std::f64::consts::FRAC_PI_4),
    ];
    let mut out = Vec::new();
    for family in [Family::F, Family::G, Family::H] {
        for l in 0..n {
            if family == Family::H && (n < 2 || l == 0) {
                continue;
            }
            for w in ws {
                let t = TestFunction::new(family, n, l, w, p)?;
                out.push((t.describe(), t.to_holo()));
            }
        }
    }
    Ok(out)
}

/// Identity, `z/2`, `(z+1)/2`, a Möbius automorphism and, for `n >= 2`,
/// the product map `(z_1 z_2, z_2, ..., z_n)`.
pub fn builtin_maps(n: usize) -> Result<Vec<(String, HoloSelfMap)>> {
    let half = Complex64::new(0.5, 0.0);
    let mut maps = vec![
        ("identity".to_string(), HoloSelfMap::identity(n)),
        ("half".to_string(), HoloSelfMap::from_series((0..n).map(|k| Series::coordinate(n, k).scale(half)).collect())?),
        (
            "shifted-half".to_string(),
            HoloSelfMap::from_series(
                (0..n).map(|k| Series::coordinate(n, k).scale(half).add(&Series::constant(n, half))).collect(),
            )?,
        ),
    ];
    let a: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(0.3 + 0.2 * k as f64, 0.7 * k as f64 + 0.4)).collect();
    let theta: Vec<f64> = (0..n).map(|k| 0.5 + k as f64).collect();
    let sigma: Vec<usize> = (0..n).map(|k| (k + 1) % n).collect();
    maps.push(("moebius".to_string(), moebius_automorphism(&a, &theta, &sigma)?));
    if n >= 2 {
        let mut comps = vec![Series::monomial(MultiIndex::unit(n, 0).add(&MultiIndex::unit(n, 1)), Complex64::new(1.0, 0.0))];
        comps.extend((1..n).map(|k| Series::coordinate(n, k)));
        maps.push(("product".to_string(), HoloSelfMap::from_series(comps)?));
    }
    Ok(maps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_corpus_shape() {
        let c = Corpus::builtin(2, 0.5, 3).unwrap();
        assert_eq!(c.functions.len(), 8 + 2 * 2 * 3 + 3);
        assert_eq!(c.maps.len(), 5);
        assert!(c.maps.iter().all(|(_, m)| m.is_certified()));
        assert!(Corpus::empty().is_empty());
    }

    #[test]
    fn polynomials_are_reproducible_and_nonconstant() {
        let a = random_polynomials(2, 5, 4, 9);
        let b = random_polynomials(2, 5, 4, 9);
        for ((_, f), (_, g)) in a.iter().zip(&b) {
            let (f, g) = (f.as_series().unwrap(), g.as_series().unwrap());
            assert_eq!(f.terms(), g.terms());
            assert!(f.max_degree() >= 1 && f.max_degree() <= 4);
        }
    }
}

//! Little-Bloch, Lipschitz and operator-norm checks.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::holo::{compose, HoloFunction, HoloSelfMap, Series};
use crate::norms::{bloch_norm_estimate, lipschitz_norm_estimate, little_bloch_gap, NormEstimate};
use crate::polydisk::MultiIndex;
use crate::sampling::SamplingPlan;
use crate::testfn::{Family, TestFunction};

use super::{boundedness_check, check_exponents, require_certified, Verdict, DIVERGENCE_FACTOR};

/// Gap below which `φ^γ` counts as approximable by polynomials.
const GAP_TOL: f64 = 1e-3;
/// Norms below this are not used as denominators.
const NORM_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaEvidence {
    pub gamma: MultiIndex,
    pub m_low: usize,
    pub gap_low: f64,
    pub m_high: usize,
    pub gap_high: f64,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LittleBlochReport {
    pub degree_cap: usize,
    pub gammas: Vec<GammaEvidence>,
    pub bounded: Verdict,
    pub sup: f64,
    pub verdict: Verdict,
    pub note: String,
}

fn power_product(phi: &HoloSelfMap, gamma: &MultiIndex) -> HoloFunction {
    let n = phi.dim();
    let series: Option<Vec<&Series>> = phi.components().iter().map(|c| c.as_series()).collect();
    if let Some(comps) = series {
        let mut acc = Series::constant(n, Complex64::new(1.0, 0.0));
        for (s, &e) in comps.iter().zip(gamma.exponents()) {
            if e > 0 {
                acc = acc.mul(&s.powu_truncated(e, None));
            }
        }
        return HoloFunction::Series(acc);
    }
    let mut acc = HoloFunction::constant(n, Complex64::new(1.0, 0.0));
    for (c, &e) in phi.components().iter().zip(gamma.exponents()) {
        for _ in 0..e {
            acc = acc.mul(c.clone());
        }
    }
    acc
}

/// Checks that every `φ^γ` with `|γ| <= degree_cap` is close to polynomials
/// in `B^q` (gap at degree `4D` below `1e-3`) and that the criterion density
/// is bounded. Multi-indices up to the cap stand in for all multi-indices.
pub fn little_bloch_operator_check(
    phi: &HoloSelfMap,
    p: f64,
    q: f64,
    degree_cap: usize,
    plan: &SamplingPlan,
) -> Result<LittleBlochReport> {
    check_exponents(p, q)?;
    require_certified(phi)?;
    let d = degree_cap.max(1);
    let (m_low, m_high) = (2 * d, 4 * d);
    let mut gammas = Vec::new();
    for gamma in MultiIndex::all_up_to(phi.dim(), degree_cap) {
        let f = power_product(phi, &gamma);
        if f.as_series().is_some() {
            gammas.push(GammaEvidence {
                gamma,
                m_low,
                gap_low: 0.0,
                m_high,
                gap_high: 0.0,
                verdict: Verdict::Holds,
                note: "polynomial".into(),
            });
            continue;
        }
        let gaps = little_bloch_gap(&f, q, m_low, plan).and_then(|lo| Ok((lo.value, little_bloch_gap(&f, q, m_high, plan)?.value)));
        let evidence = match gaps {
            Ok((lo, hi)) => {
                let verdict = if hi < GAP_TOL {
                    Verdict::Holds
                } else if hi >= lo {
                    Verdict::Fails
                } else {
                    Verdict::Inconclusive
                };
                GammaEvidence { gamma, m_low, gap_low: lo, m_high, gap_high: hi, verdict, note: String::new() }
            }
            Err(e @ (BlochError::TruncationUnavailable(_) | BlochError::DegreeCapExceeded { .. })) => GammaEvidence {
                gamma,
                m_low,
                gap_low: f64::NAN,
                m_high,
                gap_high: f64::NAN,
                verdict: Verdict::Inconclusive,
                note: e.to_string(),
            },
            Err(e) => return Err(e),
        };
        gammas.push(evidence);
    }
    let (bounded, est) = boundedness_check(phi, p, q, plan)?;
    let all = gammas.iter().map(|g| g.verdict).chain(std::iter::once(bounded)).collect::<Vec<_>>();
    let verdict = if all.contains(&Verdict::Fails) {
        Verdict::Fails
    } else if all.iter().all(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(LittleBlochReport {
        degree_cap,
        gammas,
        bounded,
        sup: est.sup,
        verdict,
        note: format!("multi-indices of degree <= {degree_cap} stand in for all multi-indices"),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzEvidence {
    pub components: Vec<NormEstimate>,
    pub verdict: Verdict,
}

/// `C_φ` is bounded on `L_1` iff every `φ_j` is in `L_1`; each component's
/// difference-quotient estimate must reach a plateau.
pub fn lip1_boundedness_check(phi: &HoloSelfMap, plan: &SamplingPlan) -> Result<LipschitzEvidence> {
    require_certified(phi)?;
    let components =
        phi.components().iter().map(|f| lipschitz_norm_estimate(f, 1.0, plan)).collect::<Result<Vec<_>>>()?;
    let per = components.iter().map(|e| {
        let t = &e.trace;
        let growing = t.len() >= 4 && t[t.len() - 1] >= DIVERGENCE_FACTOR * t[t.len() - 4];
        if growing {
            Verdict::Fails
        } else if e.converged {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        }
    });
    let per: Vec<_> = per.collect();
    let verdict = if per.contains(&Verdict::Fails) {
        Verdict::Fails
    } else if per.iter().all(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(LipschitzEvidence { components, verdict })
}

/// Radii `{0, 0.5, 0.9, 0.99}` times 8 angles (the origin once).
pub fn default_w_grid() -> Vec<Complex64> {
    let mut grid = vec![Complex64::new(0.0, 0.0)];
    for r in [0.5, 0.9, 0.99] {
        for a in 0..8 {
            grid.push(Complex64::from_polar(r, TAU * a as f64 / 8.0));
        }
    }
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormBound {
    pub value: f64,
    pub family: Family,
    /// 1-based coordinate index of the extremal test function.
    pub l: usize,
    pub w: [f64; 2],
    pub numerator: f64,
    pub denominator: f64,
    pub tested: usize,
}

/// `max_ν ‖ν ∘ φ‖_{B^q} / ‖ν‖_{B^p}` over the test families, every `l`, and
/// `w` in `w_grid`: a lower bound for `‖C_φ‖` up to estimator undershoot.
pub fn operator_norm_lower_bound(
    phi: &HoloSelfMap,
    p: f64,
    q: f64,
    w_grid: &[Complex64],
    plan: &SamplingPlan,
) -> Result<OperatorNormBound> {
    check_exponents(p, q)?;
    require_certified(phi)?;
    let n = phi.dim();
    let phi = std::sync::Arc::new(phi.clone());
    let mut best: Option<OperatorNormBound> = None;
    let mut tested = 0;
    for family in [Family::F, Family::G, Family::H] {
        for l in 0..n {
            if family == Family::H && (n < 2 || l == 0) {
                continue;
            }
            for &w in w_grid {
                let nu = TestFunction::new(family, n, l, w, p)?.to_holo();
                let denominator = bloch_norm_estimate(&nu, p, plan)?.value;
                if denominator < NORM_FLOOR {
                    continue;
                }
                let numerator = bloch_norm_estimate(&compose(&nu, &phi)?, q, plan)?.value;
                tested += 1;
                let value = numerator / denominator;
                if best.as_ref().is_none_or(|b| value > b.value) {
                    best = Some(OperatorNormBound {
                        value,
                        family,
                        l: l + 1,
                        w: [w.re, w.im],
                        numerator,
                        denominator,
                        tested: 0,
                    });
                }
            }
        }
    }
    let mut best = best.ok_or_else(|| BlochError::InvalidParameter("no admissible test function".into()))?;
    best.tested = tested;
    Ok(best)
}

//! Boundedness and compactness criteria for composition operators
//! `C_φ f = f ∘ φ` between Bloch-type spaces.
//!
//! Verdicts describe the numerical criterion, not a proof about the
//! operator; each carries the rule that turned it into an operator statement
//! and the evidence behind it.

mod classify;
mod little;
mod paths;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{BlochError, Result};
use crate::holo::{HoloSelfMap, MapJet};
use crate::norms::{check_exponent, NormEstimate};
use crate::polydisk::{disk_weight, PolydiskPoint};
use crate::sampling::{self, SamplingPlan};

pub use classify::{classify, ClassifyOptions, CriterionReport, REPORT_SCHEMA_VERSION, THEOREM_IDS};
pub use little::{
    lip1_boundedness_check, little_bloch_operator_check, operator_norm_lower_bound, default_w_grid, GammaEvidence,
    LipschitzEvidence, LittleBlochReport, OperatorNormBound,
};
pub use paths::{
    compactness_profile, default_paths, ApproachMode, BoundaryPath, PathTable, ProfileOutcome, COMPACTNESS_TOL,
    DECAY_RATIO, PATH_DEPTH, TAIL_FLOOR, TAIL_LEN,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Relative plateau tolerance across the last two boundary levels.
pub const PLATEAU_RTOL: f64 = 1e-3;
/// Growth factor over the last four boundary levels that counts as divergence.
pub const DIVERGENCE_FACTOR: f64 = 2.0;

fn check_exponents(p: f64, q: f64) -> Result<()> {
    check_exponent(p)?;
    check_exponent(q)
}

/// Per-`l` rows `Σ_k |∂φ_l/∂z_k| (1-|z_k|^2)^q / (1-|φ_l|^2)^p` from a jet.
pub fn density_rows(jet: &MapJet, z: &[Complex64], p: f64, q: f64) -> Result<Vec<f64>> {
    jet.values
        .iter()
        .zip(&jet.jacobian)
        .enumerate()
        .map(|(l, (v, row))| {
            let denom = disk_weight(*v);
            if !(denom > 0.0) {
                return Err(BlochError::Singular(format!("|φ_{}(z)| = {} >= 1", l + 1, v.norm())));
            }
            let num: f64 = row.iter().zip(z).map(|(d, zk)| d.norm() * disk_weight(*zk).powf(q)).sum();
            Ok(num / denom.powf(p))
        })
        .collect()
}

/// `Σ_{k,l} |∂φ_l/∂z_k(z)| (1-|z_k|^2)^q / (1-|φ_l(z)|^2)^p`.
pub fn criterion_density(phi: &HoloSelfMap, p: f64, q: f64, z: &[Complex64]) -> Result<f64> {
    Ok(density_rows(&phi.jet(z)?, z, p, q)?.iter().sum())
}

/// The single row `l` (0-based) of [`criterion_density`].
pub fn coordinate_density(phi: &HoloSelfMap, p: f64, q: f64, l: usize, z: &[Complex64]) -> Result<f64> {
    if l >= phi.dim() {
        return Err(BlochError::IndexOutOfRange { index: l, dim: phi.dim() });
    }
    Ok(density_rows(&phi.jet(z)?, z, p, q)?[l])
}

/// Reads a boundary-level profile: plateau, divergence, or neither.
pub fn profile_verdict(profile: &[f64]) -> Verdict {
    let len = profile.len();
    if len == 0 {
        return Verdict::Inconclusive;
    }
    if profile.iter().all(|v| *v == 0.0) {
        return Verdict::Holds;
    }
    if len >= 4 {
        let tail = &profile[len - 4..];
        let increasing = tail.windows(2).all(|w| w[1] > w[0]);
        if increasing && tail[3] >= DIVERGENCE_FACTOR * tail[0] {
            return Verdict::Fails;
        }
    }
    if len >= 2 && sampling::within_relative(profile[len - 1], profile[len - 2], PLATEAU_RTOL) {
        return Verdict::Holds;
    }
    Verdict::Inconclusive
}

/// Estimates `sup_z criterion_density` and decides whether it is finite.
pub fn boundedness_check(phi: &HoloSelfMap, p: f64, q: f64, plan: &SamplingPlan) -> Result<(Verdict, NormEstimate)> {
    check_exponents(p, q)?;
    require_certified(phi)?;
    let n = phi.dim();
    let search = sampling::maximize(n, plan, |z| criterion_density(phi, p, q, z))?;
    let verdict = profile_verdict(&search.level_profile);
    let estimate = NormEstimate {
        value: search.value,
        offset: 0.0,
        sup: search.value,
        witness: PolydiskPoint::new(search.witness)?,
        partner: None,
        trace: search.trace,
        level_profile: search.level_profile,
        converged: search.converged,
        evaluations: search.evaluations,
        singular_count: search.singular_count,
    };
    Ok((verdict, estimate))
}

pub(crate) fn require_certified(phi: &HoloSelfMap) -> Result<()> {
    if phi.is_certified() {
        Ok(())
    } else {
        Err(BlochError::Uncertified(
            "the map is not certified as a self-map of the polydisk; run certify_self_map first".into(),
        ))
    }
}

/// `D₂ J_φ(z) D₁^{-1}` with `D₁ = diag(1/(1-|z_k|^2))` and
/// `D₂ = diag(1/(1-|φ_l(z)|^2))`.
pub fn weighted_jacobian(phi: &HoloSelfMap, z: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let jet = phi.jet(z)?;
    let n = phi.dim();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for l in 0..n {
        let denom = disk_weight(jet.values[l]);
        if !(denom > 0.0) {
            return Err(BlochError::Singular(format!("|φ_{}(z)| = {} >= 1", l + 1, jet.values[l].norm())));
        }
        for k in 0..n {
            m[(l, k)] = jet.jacobian[l][k] * (disk_weight(z[k]) / denom);
        }
    }
    Ok(m)
}

/// Extremal ratios `H_{φ(z)}(J u)/H_z(u)` over `u ≠ 0`: the squared largest
/// and smallest singular values of the weighted Jacobian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwarzRatio {
    pub sup: f64,
    pub inf: f64,
}

pub fn schwarz_ratio(phi: &HoloSelfMap, z: &[Complex64]) -> Result<SchwarzRatio> {
    let m = weighted_jacobian(phi, z)?;
    let sv = m.singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SchwarzRatio { sup: max * max, inf: min * min })
}

/// `sup_{u≠0} H_{φ(z)}(J_φ(z) u) / H_z(u)`.
pub fn schwarz_expansion_sup(phi: &HoloSelfMap, z: &[Complex64]) -> Result<f64> {
    Ok(schwarz_ratio(phi, z)?.sup)
}
